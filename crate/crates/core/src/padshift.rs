//! Random Padding: move `k` trailing pads to just after `[CLS]` on the
//! training path only.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{Attend, EncodedWindow, CLS, PAD};
use crate::error::{Error, Result};
use crate::rng;

/// Serialized as `off`, `full` or `capped:K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ShiftMode {
    Off,
    Full,
    Capped { cap: usize },
}

impl From<ShiftMode> for String {
    fn from(m: ShiftMode) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for ShiftMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for ShiftMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShiftMode::Off => f.write_str("off"),
            ShiftMode::Full => f.write_str("full"),
            ShiftMode::Capped { cap } => write!(f, "capped:{cap}"),
        }
    }
}

impl FromStr for ShiftMode {
    type Err = Error;

    /// `off`, `full`, or `capped:K`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(ShiftMode::Off),
            "full" => Ok(ShiftMode::Full),
            _ => s
                .strip_prefix("capped:")
                .and_then(|k| k.parse().ok())
                .map(|cap| ShiftMode::Capped { cap })
                .ok_or_else(|| Error::Invalid(format!("unknown shift mode `{s}`"))),
        }
    }
}

/// When a fresh `k` is drawn for a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resample {
    /// New draw every epoch.
    #[default]
    Epoch,
    /// One draw per window for the whole run.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftPolicy {
    pub mode: ShiftMode,
    pub seed: u64,
    #[serde(default)]
    pub resample: Resample,
}

impl ShiftPolicy {
    pub fn off() -> Self {
        ShiftPolicy {
            mode: ShiftMode::Off,
            seed: 0,
            resample: Resample::Epoch,
        }
    }

    pub fn new(mode: ShiftMode, seed: u64) -> Self {
        ShiftPolicy {
            mode,
            seed,
            resample: Resample::Epoch,
        }
    }

    /// Draw `k` for window `uid` at `epoch` from its own keyed stream.
    pub fn shift_for(&self, uid: &str, epoch: usize, m: usize, n: usize) -> usize {
        if self.mode == ShiftMode::Off {
            return 0;
        }
        let epoch = match self.resample {
            Resample::Epoch => epoch as u64,
            Resample::Fixed => 0,
        };
        let mut s = rng::stream(self.seed, "padshift", uid, epoch);
        sample_shift(m, n, self.mode, &mut s)
    }
}

/// Number of pads to move to the front: 0 when off, uniform on `[0, n-m]`
/// when full, uniform on `[0, min(K, n-m)]` when capped.
pub fn sample_shift<R: Rng + ?Sized>(m: usize, n: usize, mode: ShiftMode, rng: &mut R) -> usize {
    let budget = n.saturating_sub(m);
    let hi = match mode {
        ShiftMode::Off => return 0,
        ShiftMode::Full => budget,
        ShiftMode::Capped { cap } => cap.min(budget),
    };
    rng.random_range(0..=hi)
}

/// Rewrite `[CLS] x.. [PAD]*` as `[CLS] [PAD]*k x.. [PAD]*`. Gold spans move by `k`.
pub fn apply_shift(w: &EncodedWindow, k: usize) -> Result<EncodedWindow> {
    if w.layout.k != 0 {
        return Err(Error::AlreadyShifted(w.layout.k));
    }
    let n = w.capacity();
    let m = w.layout.m;
    if k > n - m {
        return Err(Error::ShiftOutOfRange { k, max: n - m });
    }
    if k == 0 {
        return Ok(w.clone());
    }
    let mut ids = Vec::with_capacity(n);
    ids.push(CLS);
    ids.extend(std::iter::repeat_n(PAD, k));
    ids.extend_from_slice(&w.ids[1..m]);
    ids.resize(n, PAD);
    let mask = ids
        .iter()
        .map(|&id| if id == PAD { Attend::Ignore } else { Attend::Attend })
        .collect();
    let mut out = w.clone();
    out.ids = ids;
    out.mask = mask;
    out.gold_spans = w.gold_spans.iter().map(|&(s, e)| (s + k, e + k)).collect();
    out.layout.k = k;
    Ok(out)
}

/// The evaluation path: windows are fed exactly as encoded.
pub fn inference_view(w: &EncodedWindow) -> &EncodedWindow {
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{PaddingLayout, SEP};

    fn window() -> EncodedWindow {
        // [CLS q1 q2 SEP c1 c2 c3 SEP PAD PAD PAD]
        let ids = vec![CLS, 10, 11, SEP, 20, 21, 22, SEP, PAD, PAD, PAD];
        let mask = ids
            .iter()
            .map(|&i| if i == PAD { Attend::Ignore } else { Attend::Attend })
            .collect();
        EncodedWindow {
            example_id: "e".into(),
            index: 0,
            ids,
            mask,
            question_len: 2,
            context_len: 3,
            window_offset: 0,
            gold_spans: vec![(5, 6)],
            layout: PaddingLayout { k: 0, m: 8, n: 11 },
        }
    }

    #[test]
    fn zero_shift_is_identity() {
        assert_eq!(apply_shift(&window(), 0).unwrap(), window());
    }

    #[test]
    fn shift_by_two() {
        let s = apply_shift(&window(), 2).unwrap();
        assert_eq!(s.ids, vec![CLS, PAD, PAD, 10, 11, SEP, 20, 21, 22, SEP, PAD]);
        assert_eq!(s.gold_spans, vec![(7, 8)]);
        assert_eq!(s.mask[1], Attend::Ignore);
        assert_eq!(s.mask[3], Attend::Attend);
        assert_eq!(s.context_start(), 6);
        assert_eq!((s.layout.m, s.question_len, s.context_len), (8, 2, 3));
    }

    #[test]
    fn shift_out_of_range() {
        assert!(matches!(
            apply_shift(&window(), 4),
            Err(Error::ShiftOutOfRange { k: 4, max: 3 })
        ));
        let s = apply_shift(&window(), 1).unwrap();
        assert!(matches!(apply_shift(&s, 1), Err(Error::AlreadyShifted(1))));
    }

    #[test]
    fn inference_is_untouched() {
        let w = window();
        assert_eq!(inference_view(&w), &w);
        assert_ne!(inference_view(&apply_shift(&w, 3).unwrap()), &w);
    }

    #[test]
    fn full_window_never_shifts() {
        let mut r = rng::stream(0, "t", "", 0);
        for mode in [ShiftMode::Off, ShiftMode::Full, ShiftMode::Capped { cap: 9 }] {
            for _ in 0..100 {
                assert_eq!(sample_shift(16, 16, mode, &mut r), 0);
            }
        }
    }

    #[test]
    fn capped_respects_cap() {
        let mut r = rng::stream(0, "t", "", 0);
        let mut max = 0;
        for _ in 0..5000 {
            let k = sample_shift(445, 512, ShiftMode::Capped { cap: 64 }, &mut r);
            assert!(k <= 64);
            max = max.max(k);
        }
        assert_eq!(max, 64);
    }

    #[test]
    fn fixed_resample_ignores_epoch() {
        let mut p = ShiftPolicy::new(ShiftMode::Full, 3);
        p.resample = Resample::Fixed;
        let ks: Vec<_> = (0..10).map(|e| p.shift_for("w#0", e, 10, 100)).collect();
        assert!(ks.iter().all(|&k| k == ks[0]));
        p.resample = Resample::Epoch;
        let ks: Vec<_> = (0..10).map(|e| p.shift_for("w#0", e, 10, 100)).collect();
        assert!(ks.iter().any(|&k| k != ks[0]));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("capped:64".parse::<ShiftMode>().unwrap(), ShiftMode::Capped { cap: 64 });
        assert_eq!("full".parse::<ShiftMode>().unwrap(), ShiftMode::Full);
        assert!("capped:x".parse::<ShiftMode>().is_err());
        let json = serde_json::to_string(&ShiftMode::Capped { cap: 7 }).unwrap();
        assert_eq!(json, "\"capped:7\"");
        assert_eq!(serde_json::from_str::<ShiftMode>(&json).unwrap(), ShiftMode::Capped { cap: 7 });
    }
}
