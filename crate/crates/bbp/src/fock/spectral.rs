use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::{
    eigendecompose_hermitian, Moment, OperatorMatrix, QuantumState, SpectralDistribution,
    SpectralPoint, CONTAMINATION_THRESHOLD,
};
use crate::error::{Error, Result};

/// Dimension above which pure-state moments use a sparse walk of the
/// operator's nonzero entries instead of dense mat-vec products.
const SPARSE_MOMENT_DIM: usize = 5000;

fn check_shared_basis(op: &OperatorMatrix, state: &QuantumState) -> Result<()> {
    if !op.basis().compatible(state.basis()) {
        return Err(Error::BasisMismatch);
    }
    Ok(())
}

/// Outcome distribution of a Hermitian observable in a given state: the
/// probability at eigenvalue `lambda` is the summed weight `<v|rho|v>` of
/// its eigenvectors. Eigenvalues closer than `merge_tol` are merged, with
/// the merged value being the probability-weighted average. `merge_tol`
/// defaults to `1e-9` times the spectral range; the true spectrum sits on a
/// discrete lattice and numerically split degeneracies must be recombined.
pub fn spectral_distribution(
    op: &OperatorMatrix,
    state: &QuantumState,
    merge_tol: Option<f64>,
) -> Result<SpectralDistribution> {
    check_shared_basis(op, state)?;
    let eig = eigendecompose_hermitian(op)?;
    let n = eig.values.len();

    let mut probs = Vec::with_capacity(n);
    match state {
        QuantumState::Pure(pure) => {
            // amplitudes in the eigenbasis in one pass: c = V^H psi
            let psi = pure.amplitudes();
            for k in 0..n {
                let c: C64 = (0..n)
                    .map(|r| eig.vectors[(r, k)].conj() * psi[r])
                    .sum();
                probs.push(c.norm_sqr());
            }
        }
        QuantumState::Density(rho) => {
            for k in 0..n {
                let v = eig.vectors.column(k).to_owned();
                let rv = rho.entries().dot(&v);
                let p: C64 = v.iter().zip(rv.iter()).map(|(a, b)| a.conj() * b).sum();
                probs.push(p.re);
            }
        }
    }

    for (k, p) in probs.iter_mut().enumerate() {
        if *p < -1e-12 {
            return Err(Error::NumericalCheck(format!(
                "negative spectral probability {p:.3e} at eigenvalue index {k}"
            )));
        }
        if *p < 0.0 {
            *p = 0.0;
        }
    }

    let range = match (eig.values.first(), eig.values.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    let tol = merge_tol.unwrap_or(1e-9 * range);
    if tol < 0.0 {
        return Err(Error::NumericalCheck("merge_tol must be >= 0".into()));
    }

    let points = merge_points(&eig.values, &probs, tol);

    let cutoff = op.basis().total_cutoff();
    let tail = state.mass_at_or_above_shell(cutoff.saturating_sub(1));

    let dist = SpectralDistribution {
        points,
        truncation_tail: tail,
    };
    let total = dist.total_probability();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::NumericalCheck(format!(
            "spectral probabilities sum to {total}, off from 1 beyond 1e-10"
        )));
    }
    Ok(dist)
}

fn merge_points(values: &[f64], probs: &[f64], tol: f64) -> Vec<SpectralPoint> {
    let mut points: Vec<SpectralPoint> = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let anchor = values[i];
        let mut mass = probs[i];
        let mut weighted = values[i] * probs[i];
        let mut plain = values[i];
        let mut count = 1usize;
        let mut j = i + 1;
        // chain-merge: each member sits within tol of the previous one
        while j < values.len() && values[j] - values[j - 1] <= tol {
            mass += probs[j];
            weighted += values[j] * probs[j];
            plain += values[j];
            count += 1;
            j += 1;
        }
        let value = if mass > 0.0 {
            weighted / mass
        } else {
            plain / count as f64
        };
        let _ = anchor;
        points.push(SpectralPoint {
            value,
            probability: mass,
        });
        i = j;
    }
    points
}

/// Expectation `tr(rho A)`.
pub fn expectation(op: &OperatorMatrix, state: &QuantumState) -> Result<C64> {
    check_shared_basis(op, state)?;
    match state {
        QuantumState::Pure(pure) => {
            let psi = pure.amplitudes();
            let av = op.entries().dot(psi);
            Ok(psi.iter().zip(av.iter()).map(|(a, b)| a.conj() * b).sum())
        }
        QuantumState::Density(rho) => {
            // tr(rho A) without forming the product matrix
            let r = rho.entries();
            let a = op.entries();
            let n = r.nrows();
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    acc += r[(i, j)] * a[(j, i)];
                }
            }
            Ok(acc)
        }
    }
}

/// Moment `tr(rho A^order)` of a Hermitian operator, evaluated by repeated
/// application of `A` (never by forming the matrix power). The imaginary
/// part must vanish to 1e-10 and is discarded after the check.
///
/// The result is flagged as contaminated when the state carries more than
/// [`CONTAMINATION_THRESHOLD`] probability within `order` shells of the
/// cutoff, since each application of `A` can then scatter mass across the
/// truncation edge.
pub fn operator_moment(op: &OperatorMatrix, state: &QuantumState, order: u32) -> Result<Moment> {
    check_shared_basis(op, state)?;
    if !op.is_hermitian() {
        return Err(Error::NotHermitian { deviation: f64::NAN });
    }
    let cutoff = op.basis().total_cutoff();
    let guard_shell = (cutoff + 1).saturating_sub(order);
    let contaminated = order > 0
        && state.mass_at_or_above_shell(guard_shell) > CONTAMINATION_THRESHOLD;

    let value = match state {
        QuantumState::Pure(pure) => {
            let psi = pure.amplitudes();
            let mut v = psi.clone();
            if op.dim() > SPARSE_MOMENT_DIM {
                let sparse = SparseApply::from_dense(op.entries());
                for _ in 0..order {
                    v = sparse.apply(&v);
                }
            } else {
                for _ in 0..order {
                    v = op.entries().dot(&v);
                }
            }
            let m: C64 = psi.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            m
        }
        QuantumState::Density(rho) => {
            let mut b = rho.entries().clone();
            for _ in 0..order {
                b = op.entries().dot(&b);
            }
            b.diag().sum()
        }
    };

    if value.im.abs() > 1e-10 {
        return Err(Error::NumericalCheck(format!(
            "Hermitian moment has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(Moment {
        value: value.re,
        contaminated,
    })
}

/// Nonzero-entry representation for repeated application on large bases.
struct SparseApply {
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseApply {
    fn from_dense(a: &Array2<C64>) -> Self {
        let n = a.nrows();
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::new();
            for j in 0..n {
                let z = a[(i, j)];
                if z != C64::new(0.0, 0.0) {
                    row.push((j, z));
                }
            }
            rows.push(row);
        }
        SparseApply { rows }
    }

    fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        let mut out = Array1::<C64>::zeros(v.len());
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &(j, z) in row {
                acc += z * v[j];
            }
            out[i] = acc;
        }
        out
    }
}
