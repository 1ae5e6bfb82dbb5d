//! Truncated multimode Fock-space layer: basis enumeration, operator
//! matrices, Hermitian eigendecomposition and spectral measures.
//!
//! Everything here is dense and immutable after construction. The global
//! total-photon cutoff (rather than per-mode cutoffs) keeps the
//! photon-number-conserving couplings exact away from the top shell, and the
//! residual truncation error is surfaced explicitly through
//! [`SpectralDistribution::truncation_tail`] and [`Moment::contaminated`].

mod basis;
mod eigen;
mod operators;
mod spectral;

pub use basis::{FockBasis, DEFAULT_MAX_STATES};
pub use eigen::{eigendecompose_hermitian, HermitianEigen};
pub use operators::{
    annihilation_matrix, creation_matrix, number_matrix, weighted_energy_matrix,
};
pub use spectral::{expectation, operator_moment, spectral_distribution};

use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Elementwise tolerance for the Hermiticity check.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Probability mass threshold above which a moment is flagged as
/// contaminated by the cutoff.
pub const CONTAMINATION_THRESHOLD: f64 = 1e-8;

/// Complex square matrix over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    basis: Arc<FockBasis>,
    entries: Array2<C64>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wraps a matrix. When `hermitian` is set the entries are checked
    /// against their conjugate transpose to within [`HERMITICITY_TOL`].
    pub fn new(basis: Arc<FockBasis>, entries: Array2<C64>, hermitian: bool) -> Result<Self> {
        let n = basis.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{} but the basis has {} states",
                entries.nrows(),
                entries.ncols(),
                n
            )));
        }
        if hermitian {
            let dev = hermiticity_deviation(&entries);
            if dev > HERMITICITY_TOL {
                return Err(Error::NotHermitian { deviation: dev });
            }
        }
        Ok(OperatorMatrix {
            basis,
            entries,
            hermitian,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        let entries = self.entries.t().mapv(|z| z.conj());
        OperatorMatrix {
            basis: self.basis.clone(),
            entries,
            hermitian: self.hermitian,
        }
    }

    pub fn apply(&self, vector: &Array1<C64>) -> Array1<C64> {
        self.entries.dot(vector)
    }

    pub fn same_basis(&self, other: &OperatorMatrix) -> bool {
        self.basis.compatible(&other.basis)
    }
}

pub(crate) fn hermiticity_deviation(entries: &Array2<C64>) -> f64 {
    let n = entries.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            let d = (entries[(i, j)] - entries[(j, i)].conj()).norm();
            if d > dev {
                dev = d;
            }
        }
    }
    dev
}

/// Normalized state vector over a [`FockBasis`].
///
/// `truncation_tail` records the probability mass the cutoff discarded
/// during construction (exactly zero for finite Fock expansions).
#[derive(Debug, Clone)]
pub struct PureState {
    basis: Arc<FockBasis>,
    amplitudes: Array1<C64>,
    truncation_tail: f64,
}

impl PureState {
    pub fn new(
        basis: Arc<FockBasis>,
        amplitudes: Array1<C64>,
        truncation_tail: f64,
    ) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "state vector has {} amplitudes but the basis has {} states",
                amplitudes.len(),
                basis.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NumericalCheck(format!(
                "state vector norm {norm} deviates from 1 beyond 1e-10"
            )));
        }
        Ok(PureState {
            basis,
            amplitudes,
            truncation_tail,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn truncation_tail(&self) -> f64 {
        self.truncation_tail
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn to_density(&self) -> DensityOperator {
        let n = self.amplitudes.len();
        let entries = Array2::from_shape_fn((n, n), |(i, j)| {
            self.amplitudes[i] * self.amplitudes[j].conj()
        });
        DensityOperator {
            basis: self.basis.clone(),
            entries,
        }
    }
}

/// Density matrix over a [`FockBasis`]: Hermitian, unit trace, positive
/// semidefinite. Hermiticity and trace are checked at construction; the
/// (expensive) eigenvalue positivity check lives in [`DensityOperator::validate`].
#[derive(Debug, Clone)]
pub struct DensityOperator {
    basis: Arc<FockBasis>,
    entries: Array2<C64>,
}

impl DensityOperator {
    pub fn new(basis: Arc<FockBasis>, entries: Array2<C64>) -> Result<Self> {
        let n = basis.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {}x{} but the basis has {} states",
                entries.nrows(),
                entries.ncols(),
                n
            )));
        }
        let dev = hermiticity_deviation(&entries);
        if dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace: C64 = entries.diag().sum();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::NumericalCheck(format!(
                "density matrix trace {trace} deviates from 1 beyond 1e-10"
            )));
        }
        Ok(DensityOperator { basis, entries })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Probability of the given basis state.
    pub fn diagonal_probability(&self, index: usize) -> f64 {
        self.entries[(index, index)].re
    }

    /// Full positivity check: smallest eigenvalue must be >= -1e-10.
    pub fn validate(&self) -> Result<()> {
        let op = OperatorMatrix::new(self.basis.clone(), self.entries.clone(), true)?;
        let eig = eigendecompose_hermitian(&op)?;
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::NumericalCheck(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }
}

/// A state that is either a pure vector or a density matrix. Operations that
/// only need quadratic forms use the rank-one shortcut for pure states,
/// which keeps large bases affordable.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure(PureState),
    Density(DensityOperator),
}

impl From<PureState> for QuantumState {
    fn from(s: PureState) -> Self {
        QuantumState::Pure(s)
    }
}

impl From<DensityOperator> for QuantumState {
    fn from(s: DensityOperator) -> Self {
        QuantumState::Density(s)
    }
}

impl QuantumState {
    pub fn basis(&self) -> &Arc<FockBasis> {
        match self {
            QuantumState::Pure(s) => s.basis(),
            QuantumState::Density(s) => s.basis(),
        }
    }

    /// Probability of basis state `index`.
    pub fn basis_probability(&self, index: usize) -> f64 {
        match self {
            QuantumState::Pure(s) => s.amplitudes()[index].norm_sqr(),
            QuantumState::Density(s) => s.diagonal_probability(index),
        }
    }

    /// Probability mass on basis states whose total photon number is
    /// >= `min_total`.
    pub fn mass_at_or_above_shell(&self, min_total: u32) -> f64 {
        let basis = self.basis();
        let start = basis.first_index_of_shell(min_total);
        (start..basis.len())
            .map(|i| self.basis_probability(i))
            .sum()
    }

    /// Quadratic form `<v|rho|v>` for an arbitrary vector.
    pub fn quadratic_form(&self, v: &Array1<C64>) -> f64 {
        match self {
            QuantumState::Pure(s) => {
                let overlap: C64 = s
                    .amplitudes()
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| b.conj() * a)
                    .sum();
                overlap.norm_sqr()
            }
            QuantumState::Density(s) => {
                let rv = s.entries().dot(v);
                let q: C64 = v.iter().zip(rv.iter()).map(|(a, b)| a.conj() * b).sum();
                q.re
            }
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        match self {
            QuantumState::Pure(s) => s.to_density(),
            QuantumState::Density(s) => s.clone(),
        }
    }

    pub fn truncation_tail(&self) -> f64 {
        match self {
            QuantumState::Pure(s) => s.truncation_tail(),
            QuantumState::Density(_) => 0.0,
        }
    }
}

/// One point of a discrete outcome distribution.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectralPoint {
    pub value: f64,
    pub probability: f64,
}

/// Discrete outcome distribution from a spectral decomposition, sorted by
/// value with degenerate eigenvalues merged.
///
/// `truncation_tail` is the probability the state assigns to the top two
/// photon-number shells; outcomes computed from states with a large tail
/// are cutoff-sensitive.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SpectralDistribution {
    pub points: Vec<SpectralPoint>,
    pub truncation_tail: f64,
}

impl SpectralDistribution {
    pub fn total_probability(&self) -> f64 {
        self.points.iter().map(|p| p.probability).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.points
            .iter()
            .map(|p| p.probability * (p.value - m).powi(2))
            .sum()
    }

    pub fn moment(&self, order: u32) -> f64 {
        self.points
            .iter()
            .map(|p| p.probability * p.value.powi(order as i32))
            .sum()
    }

    pub fn expectation_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .map(|p| p.probability * f(p.value))
            .sum()
    }

    pub fn min_value(&self) -> Option<f64> {
        self.points.first().map(|p| p.value)
    }

    pub fn max_value(&self) -> Option<f64> {
        self.points.last().map(|p| p.value)
    }

    /// Cumulative probabilities aligned with `points`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.points
            .iter()
            .map(|p| {
                acc += p.probability;
                acc
            })
            .collect()
    }

    /// Total variation distance against another discrete distribution.
    /// Atoms closer than `value_tol` are identified.
    pub fn total_variation(&self, other: &SpectralDistribution, value_tol: f64) -> f64 {
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.points.len() + other.points.len());
        for p in &self.points {
            merged.push((p.value, p.probability));
        }
        for p in &other.points {
            merged.push((p.value, -p.probability));
        }
        merged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut tv = 0.0;
        let mut i = 0;
        while i < merged.len() {
            let mut diff = merged[i].1;
            let anchor = merged[i].0;
            let mut j = i + 1;
            while j < merged.len() && merged[j].0 - anchor <= value_tol {
                diff += merged[j].1;
                j += 1;
            }
            tv += diff.abs();
            i = j;
        }
        0.5 * tv
    }
}

/// Result of a moment computation, carrying the cutoff-contamination flag.
#[derive(Debug, Clone, Copy)]
pub struct Moment {
    pub value: f64,
    /// Set when the state puts more than [`CONTAMINATION_THRESHOLD`] of its
    /// mass within `order` shells of the cutoff.
    pub contaminated: bool,
}
