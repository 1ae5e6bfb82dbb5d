use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::{FockBasis, OperatorMatrix};
use crate::error::{Error, Result};

fn check_mode(basis: &FockBasis, mode: usize) -> Result<()> {
    if mode >= basis.mode_count() {
        return Err(Error::ModeOutOfRange {
            mode,
            mode_count: basis.mode_count(),
        });
    }
    Ok(())
}

/// Matrix of the annihilation operator for one mode:
/// `<m|a_k|n> = sqrt(n_k)` when `m` equals `n` with one photon removed from
/// mode `k`. Exact on the truncated basis since it lowers the total photon
/// number.
pub fn annihilation_matrix(basis: &Arc<FockBasis>, mode: usize) -> Result<OperatorMatrix> {
    check_mode(basis, mode)?;
    let n = basis.len();
    let mut entries = Array2::<C64>::zeros((n, n));
    let mut lowered = vec![0u32; basis.mode_count()];
    for (col, occ) in basis.iter_states() {
        if occ[mode] == 0 {
            continue;
        }
        lowered.copy_from_slice(occ);
        lowered[mode] -= 1;
        let row = basis
            .index_of(&lowered)
            .expect("lowered state stays within the cutoff");
        entries[(row, col)] = C64::new((occ[mode] as f64).sqrt(), 0.0);
    }
    OperatorMatrix::new(basis.clone(), entries, false)
}

/// Adjoint of [`annihilation_matrix`].
pub fn creation_matrix(basis: &Arc<FockBasis>, mode: usize) -> Result<OperatorMatrix> {
    Ok(annihilation_matrix(basis, mode)?.adjoint())
}

/// Diagonal photon-number operator for one mode.
pub fn number_matrix(basis: &Arc<FockBasis>, mode: usize) -> Result<OperatorMatrix> {
    check_mode(basis, mode)?;
    let n = basis.len();
    let mut entries = Array2::<C64>::zeros((n, n));
    for (i, occ) in basis.iter_states() {
        entries[(i, i)] = C64::new(occ[mode] as f64, 0.0);
    }
    OperatorMatrix::new(basis.clone(), entries, true)
}

/// Weighted-sum-of-photon-numbers observable over a subset of modes:
/// diagonal with entry `sum_k w_k n_k`. This is what an energy-resolving
/// detector measures when the weights are the per-mode photon energies;
/// unit weights give the total photon number.
pub fn weighted_energy_matrix(
    basis: &Arc<FockBasis>,
    weights: &[f64],
    modes: &[usize],
) -> Result<OperatorMatrix> {
    if weights.len() != modes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} modes",
            weights.len(),
            modes.len()
        )));
    }
    for (i, &w) in weights.iter().enumerate() {
        if !(w > 0.0) {
            return Err(Error::NonPositiveWeight { index: i, value: w });
        }
    }
    for &m in modes {
        check_mode(basis, m)?;
    }
    let n = basis.len();
    let mut entries = Array2::<C64>::zeros((n, n));
    for (i, occ) in basis.iter_states() {
        let e: f64 = modes
            .iter()
            .zip(weights.iter())
            .map(|(&m, &w)| w * occ[m] as f64)
            .sum();
        entries[(i, i)] = C64::new(e, 0.0);
    }
    OperatorMatrix::new(basis.clone(), entries, true)
}
