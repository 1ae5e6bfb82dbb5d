use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::OperatorMatrix;
use crate::error::{Error, Result};

/// Eigendecomposition of a Hermitian operator: real eigenvalues in ascending
/// order, orthonormal eigenvectors as matrix columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<C64>,
}

/// Residuals `||A v - lambda v||` are audited against `1e-10 * ||A||`. Full
/// verification costs another O(n^3), so above this dimension only a
/// deterministic sample of columns is checked.
const FULL_AUDIT_DIM: usize = 600;
const AUDIT_SAMPLE: usize = 16;

/// Dense Hermitian eigendecomposition (for the discrete outcome spectra).
///
/// Backed by faer's self-adjoint solver; results are re-sorted ascending and
/// residual-audited before being returned.
pub fn eigendecompose_hermitian(op: &OperatorMatrix) -> Result<HermitianEigen> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian { deviation: f64::NAN });
    }
    let n = op.dim();
    let a = op.entries();

    let m = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| a[(i, j)]);
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::EigenFailure(format!("{e:?}")))?;

    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].re.partial_cmp(&s[j].re).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = Array2::<C64>::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        let lambda = s[src].re;
        if !lambda.is_finite() {
            return Err(Error::EigenFailure(format!(
                "non-finite eigenvalue {lambda}"
            )));
        }
        values.push(lambda);
        for row in 0..n {
            vectors[(row, col)] = u[(row, src)];
        }
    }

    audit(a, &values, &vectors)?;
    Ok(HermitianEigen { values, vectors })
}

fn audit(a: &Array2<C64>, values: &[f64], vectors: &Array2<C64>) -> Result<()> {
    let n = values.len();
    if n == 0 {
        return Ok(());
    }
    let scale = values
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;

    let cols: Vec<usize> = if n <= FULL_AUDIT_DIM {
        (0..n).collect()
    } else {
        let step = (n / AUDIT_SAMPLE).max(1);
        (0..n).step_by(step).collect()
    };

    for &k in &cols {
        let v = vectors.column(k);
        let mut resid = 0.0f64;
        let mut norm = 0.0f64;
        for i in 0..n {
            let mut av = C64::new(0.0, 0.0);
            for j in 0..n {
                av += a[(i, j)] * v[j];
            }
            resid += (av - v[i] * values[k]).norm_sqr();
            norm += v[i].norm_sqr();
        }
        if resid.sqrt() > tol {
            return Err(Error::EigenFailure(format!(
                "residual {:.3e} exceeds {:.3e} for eigenpair {k}",
                resid.sqrt(),
                tol
            )));
        }
        if (norm.sqrt() - 1.0).abs() > 1e-10 {
            return Err(Error::EigenFailure(format!(
                "eigenvector {k} has norm {:.12}",
                norm.sqrt()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number_matrix, FockBasis};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use std::sync::Arc;

    #[test]
    fn diagonal_matrix_decomposes_trivially() {
        let basis = FockBasis::new(1, 3).unwrap();
        let n = number_matrix(&basis, 0).unwrap();
        let eig = eigendecompose_hermitian(&n).unwrap();
        assert_eq!(eig.values, vec![0.0, 1.0, 2.0, 3.0]);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(eig.vectors[(i, j)].norm(), want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_by_two_exchange() {
        let basis = FockBasis::new(1, 1).unwrap();
        let entries = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let op = OperatorMatrix::new(basis, entries, true).unwrap();
        let eig = eigendecompose_hermitian(&op).unwrap();
        assert_abs_diff_eq!(eig.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_flag() {
        let basis = FockBasis::new(1, 2).unwrap();
        let a = crate::fock::annihilation_matrix(&basis, 0).unwrap();
        assert!(matches!(
            eigendecompose_hermitian(&a).unwrap_err(),
            Error::NotHermitian { .. }
        ));
    }

    /// Independent root-finding oracle for the nodes of the n-th Hermite
    /// polynomial (Newton iteration on the three-term recurrence).
    fn hermite_nodes(n: usize) -> Vec<f64> {
        // evaluate H_n and H_n' (physicists') at x
        let eval = |x: f64| -> (f64, f64) {
            let mut hm = 1.0f64;
            let mut h = 2.0 * x;
            if n == 0 {
                return (1.0, 0.0);
            }
            for k in 1..n {
                let next = 2.0 * x * h - 2.0 * k as f64 * hm;
                hm = h;
                h = next;
            }
            (h, 2.0 * n as f64 * hm)
        };
        // positive roots descending (asymptotic guesses + Newton), the
        // negative half follows by symmetry
        let half = n / 2;
        let mut pos = Vec::with_capacity(half);
        for i in 0..half {
            let mut x = if i == 0 {
                ((2 * n + 1) as f64).sqrt() - 1.85575 * ((2 * n + 1) as f64).powf(-1.0 / 6.0)
            } else if i == 1 {
                pos[0] - 1.14 * (n as f64).powf(0.426) / pos[0]
            } else if i == 2 {
                1.86 * pos[1] - 0.86 * pos[0]
            } else if i == 3 {
                1.91 * pos[2] - 0.91 * pos[1]
            } else {
                2.0 * pos[i - 1] - pos[i - 2]
            };
            for _ in 0..100 {
                let (h, dh) = eval(x);
                let dx = h / dh;
                x -= dx;
                if dx.abs() < 1e-14 * (1.0 + x.abs()) {
                    break;
                }
            }
            pos.push(x);
        }
        let mut nodes: Vec<f64> = pos.iter().map(|&x| -x).collect();
        if n % 2 == 1 {
            nodes.push(0.0);
        }
        nodes.extend(pos.iter().rev().map(|&x| x));
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes
    }

    #[test]
    fn position_quadrature_eigenvalues_match_hermite_nodes() {
        // x = (a + a^dag)/sqrt(2) truncated at N_max is exactly the Jacobi
        // matrix of the Hermite recurrence, so its eigenvalues are the
        // (N_max+1)-point Hermite nodes.
        let n_max = 40u32;
        let basis = FockBasis::new(1, n_max).unwrap();
        let dim = basis.len();
        let mut entries = Array2::<C64>::zeros((dim, dim));
        for k in 1..dim {
            let v = (k as f64 / 2.0).sqrt();
            entries[(k - 1, k)] = C64::new(v, 0.0);
            entries[(k, k - 1)] = C64::new(v, 0.0);
        }
        let op = OperatorMatrix::new(basis, entries, true).unwrap();
        let eig = eigendecompose_hermitian(&op).unwrap();

        let nodes = hermite_nodes(dim);
        assert_eq!(nodes.len(), eig.values.len());
        for (got, want) in eig.values.iter().zip(nodes.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let basis = FockBasis::new(2, 4).unwrap();
        let dim = basis.len();
        // q-type tridiagonal-in-shells Hermitian test matrix
        let a0 = crate::fock::annihilation_matrix(&basis, 0).unwrap();
        let alpha = C64::new(0.3, 0.4);
        let gen = a0.entries().mapv(|z| z * alpha.conj() * C64::new(0.0, 1.0));
        let entries = &gen + &gen.t().mapv(|z| z.conj());
        let op = OperatorMatrix::new(basis.clone(), entries, true).unwrap();
        let eig = eigendecompose_hermitian(&op).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let dot: C64 = (0..dim)
                    .map(|r| eig.vectors[(r, i)].conj() * eig.vectors[(r, j)])
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot.re, want, epsilon = 1e-10);
                assert_abs_diff_eq!(dot.im, 0.0, epsilon = 1e-10);
            }
        }
    }
}
