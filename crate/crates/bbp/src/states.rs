//! Signal-state construction with a fixed global phase convention: every
//! coherent state carries a positive real vacuum coefficient, so overlaps
//! match the closed-form expression
//! `<beta|alpha> = exp(-(|beta|^2 + |alpha|^2 - 2 alpha conj(beta))/2)`
//! mode by mode.
//!
//! Coherent states are built directly from their Fock expansion and then
//! renormalized; the displacement operator is built independently by
//! exponentiating its anti-Hermitian generator, and the two constructions
//! cross-check each other in the test suite.

use std::sync::Arc;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation_matrix, DensityOperator, FockBasis, OperatorMatrix, PureState};
use crate::linalg::expm;

/// Truncation tail above which state construction warns (recorded on the
/// state) rather than silently renormalizing.
pub const TAIL_WARN: f64 = 1e-8;
/// Truncation tail above which state construction fails.
pub const TAIL_HARD_LIMIT: f64 = 1e-3;

/// Serde adapters encoding a complex number as a `[re, im]` pair.
pub mod complex_pair {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Serde adapters encoding a complex vector as `[[re, im], ...]`.
pub mod complex_vec {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

/// One branch of a coherent superposition: `coefficient * |amplitudes>`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperpositionTerm {
    #[serde(with = "complex_pair")]
    pub coefficient: C64,
    #[serde(with = "complex_vec")]
    pub amplitudes: Vec<C64>,
}

/// Declarative description of a signal state. Amplitude and occupation
/// vectors run over the signal modes only; LO modes always start in vacuum
/// and are displaced exclusively through the measurement channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Vacuum,
    Fock {
        occupations: Vec<u32>,
    },
    Coherent {
        #[serde(with = "complex_vec")]
        amplitudes: Vec<C64>,
    },
    CoherentSuperposition {
        terms: Vec<SuperpositionTerm>,
    },
    /// Per-mode product of single-mode specs.
    Product {
        factors: Vec<StateSpec>,
    },
}

impl StateSpec {
    /// Number of signal modes the spec addresses; `None` means "any"
    /// (vacuum).
    pub fn mode_count(&self) -> Option<usize> {
        match self {
            StateSpec::Vacuum => None,
            StateSpec::Fock { occupations } => Some(occupations.len()),
            StateSpec::Coherent { amplitudes } => Some(amplitudes.len()),
            StateSpec::CoherentSuperposition { terms } => {
                terms.first().map(|t| t.amplitudes.len())
            }
            StateSpec::Product { factors } => Some(factors.len()),
        }
    }

    pub fn validate(&self, signal_modes: usize) -> Result<()> {
        let reject = |msg: String| Err(Error::InvalidStateSpec(msg));
        match self {
            StateSpec::Vacuum => Ok(()),
            StateSpec::Fock { occupations } => {
                if occupations.len() != signal_modes {
                    return reject(format!(
                        "fock occupations cover {} modes but there are {} signal modes \
                         (LO modes must stay in vacuum)",
                        occupations.len(),
                        signal_modes
                    ));
                }
                Ok(())
            }
            StateSpec::Coherent { amplitudes } => {
                if amplitudes.len() != signal_modes {
                    return reject(format!(
                        "coherent amplitudes cover {} modes but there are {} signal modes \
                         (LO modes must stay in vacuum)",
                        amplitudes.len(),
                        signal_modes
                    ));
                }
                Ok(())
            }
            StateSpec::CoherentSuperposition { terms } => {
                if terms.is_empty() {
                    return reject("superposition needs at least one term".into());
                }
                if terms.iter().any(|t| t.amplitudes.len() != signal_modes) {
                    return reject(format!(
                        "every superposition term must cover exactly the {} signal modes",
                        signal_modes
                    ));
                }
                if terms.iter().all(|t| t.coefficient.norm() == 0.0) {
                    return reject("superposition coefficients are all zero".into());
                }
                Ok(())
            }
            StateSpec::Product { factors } => {
                if factors.len() != signal_modes {
                    return reject(format!(
                        "product has {} factors but there are {} signal modes",
                        factors.len(),
                        signal_modes
                    ));
                }
                for f in factors {
                    if matches!(f, StateSpec::Product { .. }) {
                        return reject("nested product specs are not supported".into());
                    }
                    if !matches!(f.mode_count(), None | Some(1)) {
                        return reject("product factors must be single-mode specs".into());
                    }
                    f.validate(1)?;
                }
                Ok(())
            }
        }
    }
}

/// Closed-form overlap of two multimode coherent states under the
/// positive-vacuum phase convention.
pub fn coherent_overlap(bra: &[C64], ket: &[C64]) -> C64 {
    let exponent: C64 = bra
        .iter()
        .zip(ket.iter())
        .map(|(b, a)| {
            (C64::new(-(b.norm_sqr() + a.norm_sqr()), 0.0) + 2.0 * a * b.conj()) / 2.0
        })
        .sum();
    exponent.exp()
}

/// Per-mode table `gamma^n / sqrt(n!)` for `n = 0..=cutoff`.
fn coherent_column(gamma: C64, cutoff: u32) -> Vec<C64> {
    let mut col = Vec::with_capacity(cutoff as usize + 1);
    let mut c = C64::new(1.0, 0.0);
    col.push(c);
    for n in 1..=cutoff {
        c *= gamma / C64::new((n as f64).sqrt(), 0.0);
        col.push(c);
    }
    col
}

/// Unnormalized truncated coherent expansion over the full basis, including
/// the exact prefactor `exp(-||gamma||^2/2)`, so its squared norm equals
/// `1 - tail`.
fn coherent_expansion(basis: &FockBasis, gamma: &[C64]) -> Array1<C64> {
    let cutoff = basis.total_cutoff();
    let prefactor = (-gamma.iter().map(|g| g.norm_sqr()).sum::<f64>() / 2.0).exp();
    let tables: Vec<Vec<C64>> = gamma.iter().map(|&g| coherent_column(g, cutoff)).collect();
    let mut amps = Array1::<C64>::zeros(basis.len());
    for (i, occ) in basis.iter_states() {
        let mut a = C64::new(prefactor, 0.0);
        for (k, &n) in occ.iter().enumerate() {
            a *= tables[k][n as usize];
        }
        amps[i] = a;
    }
    amps
}

fn finalize(basis: &Arc<FockBasis>, mut amps: Array1<C64>, exact_norm_sqr: f64) -> Result<PureState> {
    let trunc_norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    if trunc_norm_sqr <= 0.0 || exact_norm_sqr <= 0.0 {
        return Err(Error::InvalidStateSpec(
            "state has zero norm after truncation".into(),
        ));
    }
    let tail = (1.0 - trunc_norm_sqr / exact_norm_sqr).max(0.0);
    if tail > TAIL_HARD_LIMIT {
        return Err(Error::TruncationTail {
            tail,
            limit: TAIL_HARD_LIMIT,
        });
    }
    let norm = trunc_norm_sqr.sqrt();
    amps.mapv_inplace(|z| z / norm);
    PureState::new(basis.clone(), amps, tail)
}

/// Truncated, renormalized coherent state `|gamma>` over all modes of the
/// basis. The vacuum coefficient is positive real by construction.
pub fn coherent_amplitudes_to_state(basis: &Arc<FockBasis>, gamma: &[C64]) -> Result<PureState> {
    if gamma.len() != basis.mode_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} coherent amplitudes for a basis with {} modes",
            gamma.len(),
            basis.mode_count()
        )));
    }
    let amps = coherent_expansion(basis, gamma);
    finalize(basis, amps, 1.0)
}

/// Displacement operator for one mode, built as the matrix exponential of
/// its generator `beta a^dag - conj(beta) a`.
pub fn displacement_matrix(basis: &Arc<FockBasis>, mode: usize, beta: C64) -> Result<OperatorMatrix> {
    let a = annihilation_matrix(basis, mode)?;
    let adag = a.adjoint();
    let gen = adag.entries().mapv(|z| z * beta) - a.entries().mapv(|z| z * beta.conj());
    let d = expm(&gen)?;
    OperatorMatrix::new(basis.clone(), d, false)
}

/// Builds the pure state described by `spec` on the first `signal_modes`
/// modes of `basis`, with every remaining (LO) mode in vacuum. Specs that
/// address more than `signal_modes` modes are rejected: LO photons can only
/// enter through the measurement channel.
pub fn build_pure(
    basis: &Arc<FockBasis>,
    signal_modes: usize,
    spec: &StateSpec,
) -> Result<PureState> {
    if signal_modes == 0 || signal_modes > basis.mode_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} signal modes on a basis with {} modes",
            signal_modes,
            basis.mode_count()
        )));
    }
    spec.validate(signal_modes)?;
    let m = basis.mode_count();
    let cutoff = basis.total_cutoff();

    let pad = |v: &[C64]| -> Vec<C64> {
        let mut full = vec![C64::new(0.0, 0.0); m];
        full[..v.len()].copy_from_slice(v);
        full
    };

    match spec {
        StateSpec::Vacuum => {
            let mut amps = Array1::<C64>::zeros(basis.len());
            amps[0] = C64::new(1.0, 0.0);
            PureState::new(basis.clone(), amps, 0.0)
        }
        StateSpec::Fock { occupations } => {
            let total: u32 = occupations.iter().sum();
            if total > cutoff {
                return Err(Error::InvalidStateSpec(format!(
                    "fock occupation with {total} photons exceeds the cutoff {cutoff}"
                )));
            }
            let mut occ = vec![0u32; m];
            occ[..occupations.len()].copy_from_slice(occupations);
            let idx = basis.index_of(&occ).expect("within cutoff");
            let mut amps = Array1::<C64>::zeros(basis.len());
            amps[idx] = C64::new(1.0, 0.0);
            PureState::new(basis.clone(), amps, 0.0)
        }
        StateSpec::Coherent { amplitudes } => {
            coherent_amplitudes_to_state(basis, &pad(amplitudes))
        }
        StateSpec::CoherentSuperposition { terms } => {
            let mut amps = Array1::<C64>::zeros(basis.len());
            for t in terms {
                let branch = coherent_expansion(basis, &pad(&t.amplitudes));
                amps = amps + branch.mapv(|z| z * t.coefficient);
            }
            // exact squared norm from the overlap Gram matrix
            let mut exact = C64::new(0.0, 0.0);
            for ti in terms {
                for tj in terms {
                    exact += ti.coefficient.conj()
                        * tj.coefficient
                        * coherent_overlap(&ti.amplitudes, &tj.amplitudes);
                }
            }
            if exact.re <= 1e-14 {
                return Err(Error::InvalidStateSpec(
                    "superposition terms cancel to the zero vector".into(),
                ));
            }
            finalize(basis, amps, exact.re)
        }
        StateSpec::Product { factors } => {
            // per-mode unnormalized tables with exact prefactors
            let mut tables: Vec<Vec<C64>> = Vec::with_capacity(m);
            let mut exact_norm_sqr = 1.0f64;
            for f in factors {
                let (table, norm_sqr) = single_mode_table(f, cutoff)?;
                tables.push(table);
                exact_norm_sqr *= norm_sqr;
            }
            for _ in factors.len()..m {
                let mut vac = vec![C64::new(0.0, 0.0); cutoff as usize + 1];
                vac[0] = C64::new(1.0, 0.0);
                tables.push(vac);
            }
            let mut amps = Array1::<C64>::zeros(basis.len());
            for (i, occ) in basis.iter_states() {
                let mut a = C64::new(1.0, 0.0);
                for (k, &n) in occ.iter().enumerate() {
                    a *= tables[k][n as usize];
                }
                amps[i] = a;
            }
            finalize(basis, amps, exact_norm_sqr)
        }
    }
}

/// Single-mode amplitude table (index = photon number) plus the exact
/// squared norm of the untruncated state.
fn single_mode_table(spec: &StateSpec, cutoff: u32) -> Result<(Vec<C64>, f64)> {
    let dim = cutoff as usize + 1;
    match spec {
        StateSpec::Vacuum => {
            let mut t = vec![C64::new(0.0, 0.0); dim];
            t[0] = C64::new(1.0, 0.0);
            Ok((t, 1.0))
        }
        StateSpec::Fock { occupations } => {
            let n = occupations[0];
            if n > cutoff {
                return Err(Error::InvalidStateSpec(format!(
                    "fock occupation {n} exceeds the cutoff {cutoff}"
                )));
            }
            let mut t = vec![C64::new(0.0, 0.0); dim];
            t[n as usize] = C64::new(1.0, 0.0);
            Ok((t, 1.0))
        }
        StateSpec::Coherent { amplitudes } => {
            let g = amplitudes[0];
            let pref = (-g.norm_sqr() / 2.0).exp();
            let t = coherent_column(g, cutoff)
                .into_iter()
                .map(|c| c * pref)
                .collect();
            Ok((t, 1.0))
        }
        StateSpec::CoherentSuperposition { terms } => {
            let mut t = vec![C64::new(0.0, 0.0); dim];
            for term in terms {
                let g = term.amplitudes[0];
                let pref = (-g.norm_sqr() / 2.0).exp();
                for (n, c) in coherent_column(g, cutoff).into_iter().enumerate() {
                    t[n] += term.coefficient * c * pref;
                }
            }
            let mut exact = C64::new(0.0, 0.0);
            for ti in terms {
                for tj in terms {
                    exact += ti.coefficient.conj()
                        * tj.coefficient
                        * coherent_overlap(&ti.amplitudes, &tj.amplitudes);
                }
            }
            if exact.re <= 1e-14 {
                return Err(Error::InvalidStateSpec(
                    "superposition terms cancel to the zero vector".into(),
                ));
            }
            Ok((t, exact.re))
        }
        StateSpec::Product { .. } => unreachable!("rejected by validate"),
    }
}

/// Density-matrix form of [`build_pure`].
pub fn build_state(
    basis: &Arc<FockBasis>,
    signal_modes: usize,
    spec: &StateSpec,
) -> Result<DensityOperator> {
    Ok(build_pure(basis, signal_modes, spec)?.to_density())
}
