//! Single- and two-mode unitaries on truncated Fock spaces.

use nalgebra::DMatrix;

use crate::C64;

/// Displacement `D(β) = exp(β a† − β* a)` restricted to levels `0..dim`.
///
/// The generator is truncated first and then exponentiated, so the result is
/// unitary on the truncated space. Entries near the top level differ from the
/// infinite-dimensional matrix; callers keep states well below the cutoff.
pub fn displacement_matrix(beta: C64, dim: usize) -> DMatrix<C64> {
    let mut generator = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..dim.saturating_sub(1) {
        let s = ((n + 1) as f64).sqrt();
        generator[(n + 1, n)] = beta * s;
        generator[(n, n + 1)] = -beta.conj() * s;
    }
    generator.exp()
}

/// Photon-number blocks of the beam splitter `exp(θ(a_p† a_q − a_p a_q†))`
/// with `t = cos θ`, `r = sin θ`, for total photon numbers `0..=max_total`.
///
/// Heisenberg action: `a_p → t a_p + r a_q`, `a_q → t a_q − r a_p`; coherent
/// amplitudes `(μ_p, μ_q)` map to `(t μ_p + r μ_q, t μ_q − r μ_p)`.
/// Block `n` is indexed by the photon number in mode `p`.
pub fn beamsplitter_blocks(t: f64, max_total: usize) -> Vec<DMatrix<f64>> {
    assert!((0.0..=1.0).contains(&t), "transmissivity must lie in [0, 1], got {t}");
    let theta = t.acos();
    (0..=max_total)
        .map(|total| {
            let size = total + 1;
            let mut generator = DMatrix::<f64>::zeros(size, size);
            for k in 0..total {
                let s = theta * (((k + 1) * (total - k)) as f64).sqrt();
                generator[(k + 1, k)] = s;
                generator[(k, k + 1)] = -s;
            }
            generator.exp()
        })
        .collect()
}
