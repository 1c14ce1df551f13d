//! Pre-norm transformer encoder with a span-extraction head, forward and
//! exact reverse-mode gradients.
//!
//! Only attend-masked positions enter the computation. This is the additive
//! `-inf` mask taken to its limit: ignored keys get exactly zero attention
//! weight, and nothing downstream reads ignored rows, so their embedding rows
//! receive exactly zero gradient.

use super::linalg::{affine, affine_backward, dot, log_sum_exp, softmax_in_place};
use super::params::{Gradients, ModelParams};
use crate::encoding::{Attend, EncodedWindow};
use crate::error::{Error, Result};

const LN_EPS: f64 = 1e-5;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

/// Start/end logits over the context tokens of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanLogits {
    /// Token index of the first context token.
    pub context_start: usize,
    /// `S·T_i` for each context token, in order.
    pub start: Vec<f64>,
    /// `E·T_i` for each context token, in order.
    pub end: Vec<f64>,
    /// Attended token indices; row `r` of `hidden` belongs to `positions[r]`.
    pub positions: Vec<usize>,
    /// Final representations `T`, `positions.len() × H`.
    pub hidden: Vec<f64>,
    pub hidden_size: usize,
}

impl SpanLogits {
    pub fn context_len(&self) -> usize {
        self.start.len()
    }

    /// One past the last context token index.
    pub fn context_end(&self) -> usize {
        self.context_start + self.start.len()
    }

    pub fn start_probs(&self) -> Vec<f64> {
        let mut p = self.start.clone();
        softmax_in_place(&mut p);
        p
    }

    pub fn end_probs(&self) -> Vec<f64> {
        let mut p = self.end.clone();
        softmax_in_place(&mut p);
        p
    }

    /// Representation `T_p` of token index `p`, if it was attended.
    pub fn representation(&self, p: usize) -> Option<&[f64]> {
        let h = self.hidden_size;
        self.positions
            .binary_search(&p)
            .ok()
            .map(|r| &self.hidden[r * h..(r + 1) * h])
    }

    fn check(&self, s: usize, e: usize) -> Result<()> {
        let lo = self.context_start;
        let hi = self.context_end();
        if s < lo || e < s || e >= hi {
            return Err(Error::SpanOutOfRange {
                s,
                e,
                lo,
                hi: hi.saturating_sub(1),
            });
        }
        Ok(())
    }
}

/// `S·T_s + E·T_e` for token indices `s ≤ e` inside the context.
pub fn span_score(logits: &SpanLogits, s: usize, e: usize) -> Result<f64> {
    logits.check(s, e)?;
    let c = logits.context_start;
    Ok(logits.start[s - c] + logits.end[e - c])
}

/// Mean of the start and end negative log-likelihoods of `gold`.
pub fn loss(logits: &SpanLogits, gold: (usize, usize)) -> Result<f64> {
    logits.check(gold.0, gold.1)?;
    let c = logits.context_start;
    let ls = log_sum_exp(&logits.start) - logits.start[gold.0 - c];
    let le = log_sum_exp(&logits.end) - logits.end[gold.1 - c];
    Ok(0.5 * (ls + le))
}

struct LnCache {
    xhat: Vec<f64>,
    rstd: Vec<f64>,
}

struct LayerCache {
    ln1: LnCache,
    a: Vec<f64>,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    /// `heads × m × m` attention weights.
    probs: Vec<f64>,
    attn: Vec<f64>,
    ln2: LnCache,
    b: Vec<f64>,
    u: Vec<f64>,
    g: Vec<f64>,
}

struct Cache {
    ids: Vec<u32>,
    layers: Vec<LayerCache>,
    lnf: LnCache,
    /// Row index of the first context token.
    ctx_row: usize,
}

fn layer_norm(x: &[f64], gain: &[f64], bias: &[f64], h: usize) -> (Vec<f64>, LnCache) {
    let m = x.len() / h;
    let mut y = vec![0.0; x.len()];
    let mut xhat = vec![0.0; x.len()];
    let mut rstd = vec![0.0; m];
    for r in 0..m {
        let row = &x[r * h..(r + 1) * h];
        let mean = row.iter().sum::<f64>() / h as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / h as f64;
        let rs = 1.0 / (var + LN_EPS).sqrt();
        rstd[r] = rs;
        for j in 0..h {
            let xh = (row[j] - mean) * rs;
            xhat[r * h + j] = xh;
            y[r * h + j] = xh * gain[j] + bias[j];
        }
    }
    (y, LnCache { xhat, rstd })
}

fn layer_norm_backward(
    dy: &[f64],
    cache: &LnCache,
    gain: &[f64],
    dgain: &mut [f64],
    dbias: &mut [f64],
    h: usize,
) -> Vec<f64> {
    let m = dy.len() / h;
    let mut dx = vec![0.0; dy.len()];
    let mut dxhat = vec![0.0; h];
    for r in 0..m {
        let dyr = &dy[r * h..(r + 1) * h];
        let xh = &cache.xhat[r * h..(r + 1) * h];
        let mut mean_d = 0.0;
        let mut mean_dx = 0.0;
        for j in 0..h {
            dgain[j] += dyr[j] * xh[j];
            dbias[j] += dyr[j];
            dxhat[j] = dyr[j] * gain[j];
            mean_d += dxhat[j];
            mean_dx += dxhat[j] * xh[j];
        }
        mean_d /= h as f64;
        mean_dx /= h as f64;
        let rs = cache.rstd[r];
        for j in 0..h {
            dx[r * h + j] = rs * (dxhat[j] - mean_d - xh[j] * mean_dx);
        }
    }
    dx
}

fn gelu(u: f64) -> f64 {
    0.5 * u * (1.0 + (GELU_C * (u + 0.044715 * u * u * u)).tanh())
}

fn gelu_grad(u: f64) -> f64 {
    let t = (GELU_C * (u + 0.044715 * u * u * u)).tanh();
    0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * u * u)
}

fn attended_positions(params: &ModelParams, w: &EncodedWindow) -> Result<Vec<usize>> {
    let n = params.config.capacity;
    if w.ids.len() != n || w.mask.len() != n {
        return Err(Error::Dimension(format!(
            "window length {} (mask {}) but model capacity {n}",
            w.ids.len(),
            w.mask.len()
        )));
    }
    let positions: Vec<usize> = (0..n).filter(|&i| w.mask[i] == Attend::Attend).collect();
    for &p in &positions {
        if w.ids[p] as usize >= params.config.vocab_size {
            return Err(Error::Dimension(format!(
                "token id {} at {p} outside vocabulary of {}",
                w.ids[p], params.config.vocab_size
            )));
        }
    }
    if w.context_len == 0 {
        return Err(Error::EmptyContext);
    }
    Ok(positions)
}

fn forward_cached(params: &ModelParams, w: &EncodedWindow) -> Result<(SpanLogits, Cache)> {
    let cfg = &params.config;
    let h = cfg.hidden;
    let ff = cfg.ff;
    let heads = cfg.heads;
    let dh = cfg.head_dim();
    let scale = 1.0 / (dh as f64).sqrt();

    let positions = attended_positions(params, w)?;
    let m = positions.len();
    let cs = w.context_start();
    let ctx_row = positions.binary_search(&cs).map_err(|_| {
        Error::Dimension(format!("context start {cs} is not an attended position"))
    })?;
    if ctx_row + w.context_len > m || positions[ctx_row + w.context_len - 1] != cs + w.context_len - 1 {
        return Err(Error::Dimension("context tokens are not contiguous attended positions".into()));
    }

    let ids: Vec<u32> = positions.iter().map(|&p| w.ids[p]).collect();
    let mut x = vec![0.0; m * h];
    for (r, (&p, &id)) in positions.iter().zip(&ids).enumerate() {
        let tok = &params.token_embedding[id as usize * h..(id as usize + 1) * h];
        let pos = params.position_row(p);
        for j in 0..h {
            x[r * h + j] = tok[j] + pos[j];
        }
    }

    let mut caches = Vec::with_capacity(cfg.layers);
    for lp in &params.layers {
        let (a, ln1) = layer_norm(&x, &lp.ln1_gain, &lp.ln1_bias, h);
        let q = affine(&a, &lp.wq, &lp.bq, m, h, h);
        let k = affine(&a, &lp.wk, &lp.bk, m, h, h);
        let v = affine(&a, &lp.wv, &lp.bv, m, h, h);
        let mut probs = vec![0.0; heads * m * m];
        let mut attn = vec![0.0; m * h];
        for hd in 0..heads {
            let off = hd * dh;
            let pm = &mut probs[hd * m * m..(hd + 1) * m * m];
            for i in 0..m {
                let qi = &q[i * h + off..i * h + off + dh];
                let row = &mut pm[i * m..(i + 1) * m];
                for (j, s) in row.iter_mut().enumerate() {
                    *s = dot(qi, &k[j * h + off..j * h + off + dh]) * scale;
                }
                softmax_in_place(row);
                let out = &mut attn[i * h + off..i * h + off + dh];
                for (j, &pij) in row.iter().enumerate() {
                    for (o, &vv) in out.iter_mut().zip(&v[j * h + off..j * h + off + dh]) {
                        *o += pij * vv;
                    }
                }
            }
        }
        let proj = affine(&attn, &lp.wo, &lp.bo, m, h, h);
        let x_mid: Vec<f64> = x.iter().zip(&proj).map(|(a, b)| a + b).collect();
        let (b, ln2) = layer_norm(&x_mid, &lp.ln2_gain, &lp.ln2_bias, h);
        let u = affine(&b, &lp.w1, &lp.b1, m, h, ff);
        let g: Vec<f64> = u.iter().map(|&z| gelu(z)).collect();
        let out = affine(&g, &lp.w2, &lp.b2, m, ff, h);
        let x_out: Vec<f64> = x_mid.iter().zip(&out).map(|(a, b)| a + b).collect();
        x = x_out;
        caches.push(LayerCache {
            ln1,
            a,
            q,
            k,
            v,
            probs,
            attn,
            ln2,
            b,
            u,
            g,
        });
    }

    let (t, lnf) = layer_norm(&x, &params.final_gain, &params.final_bias, h);
    let rows = ctx_row..ctx_row + w.context_len;
    let start = rows
        .clone()
        .map(|r| dot(&t[r * h..(r + 1) * h], &params.span_start))
        .collect();
    let end = rows
        .map(|r| dot(&t[r * h..(r + 1) * h], &params.span_end))
        .collect();
    Ok((
        SpanLogits {
            context_start: cs,
            start,
            end,
            positions,
            hidden: t,
            hidden_size: h,
        },
        Cache {
            ids,
            layers: caches,
            lnf,
            ctx_row,
        },
    ))
}

/// Span logits for one window.
pub fn forward(params: &ModelParams, w: &EncodedWindow) -> Result<SpanLogits> {
    forward_cached(params, w).map(|(l, _)| l)
}

/// Loss of `gold` on `w`, added with `weight` into `grads`. Returns the loss.
pub fn accumulate_gradients(
    params: &ModelParams,
    w: &EncodedWindow,
    gold: (usize, usize),
    weight: f64,
    grads: &mut Gradients,
) -> Result<f64> {
    let (logits, cache) = forward_cached(params, w)?;
    let value = loss(&logits, gold)?;
    let cfg = &params.config;
    let h = cfg.hidden;
    let ff = cfg.ff;
    let heads = cfg.heads;
    let dh = cfg.head_dim();
    let scale = 1.0 / (dh as f64).sqrt();
    let m = logits.positions.len();
    let cs = logits.context_start;

    // d loss / d logits = (softmax - onehot) / 2
    let mut dstart = logits.start_probs();
    let mut dend = logits.end_probs();
    dstart[gold.0 - cs] -= 1.0;
    dend[gold.1 - cs] -= 1.0;
    for d in dstart.iter_mut().chain(dend.iter_mut()) {
        *d *= 0.5 * weight;
    }

    let t = &logits.hidden;
    let mut dt = vec![0.0; m * h];
    for (i, (&ds, &de)) in dstart.iter().zip(&dend).enumerate() {
        let r = cache.ctx_row + i;
        let tr = &t[r * h..(r + 1) * h];
        for j in 0..h {
            grads.span_start[j] += ds * tr[j];
            grads.span_end[j] += de * tr[j];
            dt[r * h + j] = ds * params.span_start[j] + de * params.span_end[j];
        }
    }

    let mut dx = layer_norm_backward(
        &dt,
        &cache.lnf,
        &params.final_gain,
        &mut grads.final_gain,
        &mut grads.final_bias,
        h,
    );

    for ((lp, lc), lg) in params
        .layers
        .iter()
        .zip(&cache.layers)
        .zip(grads.layers.iter_mut())
        .rev()
    {
        // feed-forward block: x_out = x_mid + gelu(b W1 + b1) W2 + b2
        let dg = affine_backward(&lc.g, &lp.w2, &dx, &mut lg.w2, &mut lg.b2, m, ff, h);
        let du: Vec<f64> = dg.iter().zip(&lc.u).map(|(d, &u)| d * gelu_grad(u)).collect();
        let db = affine_backward(&lc.b, &lp.w1, &du, &mut lg.w1, &mut lg.b1, m, h, ff);
        let dln2 = layer_norm_backward(&db, &lc.ln2, &lp.ln2_gain, &mut lg.ln2_gain, &mut lg.ln2_bias, h);
        let dx_mid: Vec<f64> = dx.iter().zip(&dln2).map(|(a, b)| a + b).collect();

        // attention block: x_mid = x_in + attn Wo + bo
        let dattn = affine_backward(&lc.attn, &lp.wo, &dx_mid, &mut lg.wo, &mut lg.bo, m, h, h);
        let mut dq = vec![0.0; m * h];
        let mut dk = vec![0.0; m * h];
        let mut dv = vec![0.0; m * h];
        let mut dp = vec![0.0; m];
        for hd in 0..heads {
            let off = hd * dh;
            let pm = &lc.probs[hd * m * m..(hd + 1) * m * m];
            for i in 0..m {
                let doi = &dattn[i * h + off..i * h + off + dh];
                let pi = &pm[i * m..(i + 1) * m];
                let mut weighted = 0.0;
                for j in 0..m {
                    let vj = &lc.v[j * h + off..j * h + off + dh];
                    dp[j] = dot(doi, vj);
                    weighted += pi[j] * dp[j];
                    for (g, &d) in dv[j * h + off..j * h + off + dh].iter_mut().zip(doi) {
                        *g += pi[j] * d;
                    }
                }
                let qi = &lc.q[i * h + off..i * h + off + dh];
                for j in 0..m {
                    let ds = pi[j] * (dp[j] - weighted) * scale;
                    if ds == 0.0 {
                        continue;
                    }
                    let kj = &lc.k[j * h + off..j * h + off + dh];
                    for c in 0..dh {
                        dq[i * h + off + c] += ds * kj[c];
                        dk[j * h + off + c] += ds * qi[c];
                    }
                }
            }
        }
        let mut da = affine_backward(&lc.a, &lp.wq, &dq, &mut lg.wq, &mut lg.bq, m, h, h);
        let dak = affine_backward(&lc.a, &lp.wk, &dk, &mut lg.wk, &mut lg.bk, m, h, h);
        let dav = affine_backward(&lc.a, &lp.wv, &dv, &mut lg.wv, &mut lg.bv, m, h, h);
        for ((a, b), c) in da.iter_mut().zip(&dak).zip(&dav) {
            *a += b + c;
        }
        let dln1 = layer_norm_backward(&da, &lc.ln1, &lp.ln1_gain, &mut lg.ln1_gain, &mut lg.ln1_bias, h);
        dx = dx_mid.iter().zip(&dln1).map(|(a, b)| a + b).collect();
    }

    for (r, (&p, &id)) in logits.positions.iter().zip(&cache.ids).enumerate() {
        let d = &dx[r * h..(r + 1) * h];
        let id = id as usize;
        for j in 0..h {
            grads.token_embedding[id * h + j] += d[j];
            grads.position_embedding[p * h + j] += d[j];
        }
    }
    Ok(value)
}

/// Loss and exact gradients for `gold` on one window.
pub fn backward(params: &ModelParams, w: &EncodedWindow, gold: (usize, usize)) -> Result<(f64, Gradients)> {
    let mut grads = params.zeros_like();
    let value = accumulate_gradients(params, w, gold, 1.0, &mut grads)?;
    Ok((value, grads))
}

/// Loss against the window's first gold span; `None` when it has none.
pub fn window_loss(params: &ModelParams, w: &EncodedWindow) -> Result<Option<f64>> {
    match w.gold_spans.first() {
        None => Ok(None),
        Some(&gold) => loss(&forward(params, w)?, gold).map(Some),
    }
}
