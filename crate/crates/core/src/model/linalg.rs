//! Row-major dense kernels on `f64` slices.

/// `a (r×k) · b (k×c)`.
pub fn matmul(a: &[f64], b: &[f64], r: usize, k: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        let row = &mut out[i * c..(i + 1) * c];
        for (j, &av) in a[i * k..(i + 1) * k].iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            for (o, &bv) in row.iter_mut().zip(&b[j * c..(j + 1) * c]) {
                *o += av * bv;
            }
        }
    }
    out
}

/// `a (r×k) · b (k×c) + bias (c)`.
pub fn affine(a: &[f64], w: &[f64], bias: &[f64], r: usize, k: usize, c: usize) -> Vec<f64> {
    let mut out = matmul(a, w, r, k, c);
    for row in out.chunks_exact_mut(c) {
        for (o, &b) in row.iter_mut().zip(bias) {
            *o += b;
        }
    }
    out
}

/// `a (r×k) · bᵀ` where `b` is `c×k`.
pub fn matmul_nt(a: &[f64], b: &[f64], r: usize, k: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        let ar = &a[i * k..(i + 1) * k];
        for j in 0..c {
            out[i * c + j] = dot(ar, &b[j * k..(j + 1) * k]);
        }
    }
    out
}

/// `acc (k×c) += aᵀ · b` where `a` is `r×k` and `b` is `r×c`.
pub fn matmul_tn_acc(acc: &mut [f64], a: &[f64], b: &[f64], r: usize, k: usize, c: usize) {
    for i in 0..r {
        let br = &b[i * c..(i + 1) * c];
        for (j, &av) in a[i * k..(i + 1) * k].iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            for (o, &bv) in acc[j * c..(j + 1) * c].iter_mut().zip(br) {
                *o += av * bv;
            }
        }
    }
}

/// Backward of `y = x·w + b`: accumulates weight and bias gradients and
/// returns `dx = dy·wᵀ`.
#[allow(clippy::too_many_arguments)]
pub fn affine_backward(
    x: &[f64],
    w: &[f64],
    dy: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    r: usize,
    k: usize,
    c: usize,
) -> Vec<f64> {
    matmul_tn_acc(dw, x, dy, r, k, c);
    for row in dy.chunks_exact(c) {
        for (g, &d) in db.iter_mut().zip(row) {
            *g += d;
        }
    }
    matmul_nt(dy, w, r, c, k)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place softmax with max subtraction.
pub fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

pub fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_variants_agree() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]; // 2x3
        let b = [1.0, 0.0, -1.0, 2.0, 0.5, 1.0]; // 3x2
        assert_eq!(matmul(&a, &b, 2, 3, 2), vec![0.5, 7.0, 2.0, 16.0]);
        // bᵀ stored as 2x3
        let bt = [1.0, -1.0, 0.5, 0.0, 2.0, 1.0];
        assert_eq!(matmul_nt(&a, &bt, 2, 3, 2), vec![0.5, 7.0, 2.0, 16.0]);
        let mut acc = vec![0.0; 6];
        // aᵀ (3x2) · c (2x2)
        matmul_tn_acc(&mut acc, &a, &[1.0, 0.0, 0.0, 1.0], 2, 3, 2);
        assert_eq!(acc, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
    }

    #[test]
    fn softmax_is_stable() {
        let mut v = [1000.0, 1000.0];
        softmax_in_place(&mut v);
        assert_eq!(v, [0.5, 0.5]);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
