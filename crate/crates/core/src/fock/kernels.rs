//! Index arithmetic and in-place style kernels shared by pure states and the
//! factored density operator. Amplitudes are stored row-major with mode 0
//! most significant.

use nalgebra::DMatrix;

use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Splits the flat index space around `mode` into `(outer, dim, inner)`.
pub(crate) fn split(dims: &[usize], mode: usize) -> (usize, usize, usize) {
    let outer = dims[..mode].iter().product();
    let inner = dims[mode + 1..].iter().product();
    (outer, dims[mode], inner)
}

pub(crate) fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨a|b⟩` for tensors whose per-mode dimensions may differ; missing levels
/// are treated as zero amplitudes.
pub(crate) fn inner_padded(dims_a: &[usize], a: &[C64], dims_b: &[usize], b: &[C64]) -> C64 {
    assert_eq!(dims_a.len(), dims_b.len(), "mode count mismatch");
    if dims_a == dims_b {
        return inner(a, b);
    }
    let common: Vec<usize> = dims_a.iter().zip(dims_b).map(|(x, y)| *x.min(y)).collect();
    let total: usize = common.iter().product();
    let mut counter = vec![0usize; common.len()];
    let mut acc = ZERO;
    for _ in 0..total {
        let (mut ia, mut ib) = (0usize, 0usize);
        for (k, &n) in counter.iter().enumerate() {
            ia = ia * dims_a[k] + n;
            ib = ib * dims_b[k] + n;
        }
        acc += a[ia].conj() * b[ib];
        for k in (0..common.len()).rev() {
            counter[k] += 1;
            if counter[k] < common[k] {
                break;
            }
            counter[k] = 0;
        }
    }
    acc
}

/// Applies a `dim × dim` matrix to one mode.
pub(crate) fn apply_mode_matrix(dims: &[usize], amps: &[C64], mode: usize, m: &DMatrix<C64>) -> Vec<C64> {
    let (outer, d, inner) = split(dims, mode);
    debug_assert_eq!(m.nrows(), d);
    let mut out = vec![ZERO; amps.len()];
    let mut column = vec![ZERO; d];
    for o in 0..outer {
        for i in 0..inner {
            for (n, c) in column.iter_mut().enumerate() {
                *c = amps[(o * d + n) * inner + i];
            }
            for n in 0..d {
                let mut acc = ZERO;
                for (k, c) in column.iter().enumerate() {
                    acc += m[(n, k)] * c;
                }
                out[(o * d + n) * inner + i] = acc;
            }
        }
    }
    out
}

/// Contracts one mode with a bra `Σ_n bra[n] ⟨n|`, removing the mode.
pub(crate) fn contract_bra(dims: &[usize], amps: &[C64], mode: usize, bra: &[C64]) -> Vec<C64> {
    let (outer, d, inner) = split(dims, mode);
    let mut out = vec![ZERO; outer * inner];
    for o in 0..outer {
        for n in 0..d.min(bra.len()) {
            let w = bra[n];
            if w == ZERO {
                continue;
            }
            let src = &amps[(o * d + n) * inner..(o * d + n + 1) * inner];
            let dst = &mut out[o * inner..(o + 1) * inner];
            for (t, s) in dst.iter_mut().zip(src) {
                *t += w * s;
            }
        }
    }
    out
}

/// Slice of the tensor with `mode` fixed at level `n`; the mode is removed.
pub(crate) fn pick_level(dims: &[usize], amps: &[C64], mode: usize, n: usize) -> Vec<C64> {
    let (outer, d, inner) = split(dims, mode);
    let mut out = Vec::with_capacity(outer * inner);
    for o in 0..outer {
        out.extend_from_slice(&amps[(o * d + n) * inner..(o * d + n + 1) * inner]);
    }
    out
}

pub(crate) fn annihilate(dims: &[usize], amps: &[C64], mode: usize) -> Vec<C64> {
    let (outer, d, inner) = split(dims, mode);
    let mut out = vec![ZERO; amps.len()];
    for o in 0..outer {
        for n in 0..d.saturating_sub(1) {
            let f = ((n + 1) as f64).sqrt();
            for i in 0..inner {
                out[(o * d + n) * inner + i] = amps[(o * d + n + 1) * inner + i] * f;
            }
        }
    }
    out
}

/// Probability marginal of one mode (unnormalized).
pub(crate) fn marginal(dims: &[usize], amps: &[C64], mode: usize) -> Vec<f64> {
    let (outer, d, inner) = split(dims, mode);
    let mut out = vec![0.0; d];
    for o in 0..outer {
        for (n, p) in out.iter_mut().enumerate() {
            *p += norm_sqr(&amps[(o * d + n) * inner..(o * d + n + 1) * inner]);
        }
    }
    out
}

pub(crate) fn outer_product(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        out.extend(b.iter().map(|y| x * y));
    }
    out
}

/// Applies a two-mode, photon-number-conserving unitary given as one block
/// per total photon number. `blocks[n][(m, k)]` maps `|k, n−k⟩ → |m, n−m⟩`
/// on modes `(p, q)`. Output components beyond the truncation are dropped.
pub(crate) fn apply_number_blocks(
    dims: &[usize],
    amps: &[C64],
    p: usize,
    q: usize,
    blocks: &[DMatrix<f64>],
) -> Vec<C64> {
    let strides = strides(dims);
    let (dp, dq) = (dims[p], dims[q]);
    let (sp, sq) = (strides[p], strides[q]);
    let mut out = vec![ZERO; amps.len()];
    let mut buf_in = Vec::new();
    for base in 0..amps.len() {
        if (base / sp) % dp != 0 || (base / sq) % dq != 0 {
            continue;
        }
        for (total, block) in blocks.iter().enumerate() {
            let lo = total.saturating_sub(dq - 1);
            let hi = total.min(dp - 1);
            if lo > hi {
                continue;
            }
            buf_in.clear();
            let mut any = false;
            for k in lo..=hi {
                let a = amps[base + k * sp + (total - k) * sq];
                any |= a != ZERO;
                buf_in.push(a);
            }
            if !any {
                continue;
            }
            for m in lo..=hi {
                let mut acc = ZERO;
                for (j, a) in buf_in.iter().enumerate() {
                    acc += a * block[(m, lo + j)];
                }
                out[base + m * sp + (total - m) * sq] = acc;
            }
        }
    }
    out
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}
