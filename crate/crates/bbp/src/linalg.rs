//! Small dense complex linear algebra helpers: matrix exponential by
//! Pade scaling-and-squaring and an LU solver backing it.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Matrix 1-norm (max absolute column sum).
pub fn one_norm(a: &Array2<C64>) -> f64 {
    let mut best = 0.0f64;
    for col in a.columns() {
        let s: f64 = col.iter().map(|z| z.norm()).sum();
        if s > best {
            best = s;
        }
    }
    best
}

/// Matrix exponential via the degree-13 Pade approximant with scaling and
/// squaring. Accurate to near machine precision for the operator norms that
/// occur here; the displacement generators are anti-Hermitian so the result
/// is unitary up to truncation.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch("expm needs a square matrix".into()));
    }
    const THETA_13: f64 = 5.371_920_351_148_152;
    let norm = one_norm(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scale = 2f64.powi(squarings as i32);
    let a_scaled = a.mapv(|z| z / scale);

    let mut r = pade13(&a_scaled)?;
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

fn pade13(a: &Array2<C64>) -> Result<Array2<C64>> {
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let id = Array2::<C64>::eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let u_inner = a6.mapv(|z| z * B[13]) + a4.mapv(|z| z * B[11]) + a2.mapv(|z| z * B[9]);
    let u = a.dot(
        &(a6.dot(&u_inner)
            + a6.mapv(|z| z * B[7])
            + a4.mapv(|z| z * B[5])
            + a2.mapv(|z| z * B[3])
            + id.mapv(|z| z * B[1])),
    );
    let v_inner = a6.mapv(|z| z * B[12]) + a4.mapv(|z| z * B[10]) + a2.mapv(|z| z * B[8]);
    let v = a6.dot(&v_inner)
        + a6.mapv(|z| z * B[6])
        + a4.mapv(|z| z * B[4])
        + a2.mapv(|z| z * B[2])
        + id.mapv(|z| z * B[0]);

    // solve (V - U) X = (V + U)
    let lhs = &v - &u;
    let rhs = &v + &u;
    lu_solve(&lhs, &rhs)
}

/// Solves `A X = B` by LU decomposition with partial pivoting.
pub fn lu_solve(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch("lu_solve shape mismatch".into()));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = x.ncols();

    for k in 0..n {
        let mut pivot = k;
        let mut best = lu[(k, k)].norm();
        for i in k + 1..n {
            let v = lu[(i, k)].norm();
            if v > best {
                best = v;
                pivot = i;
            }
        }
        if best == 0.0 {
            return Err(Error::NumericalCheck("singular matrix in lu_solve".into()));
        }
        if pivot != k {
            for j in 0..n {
                lu.swap((k, j), (pivot, j));
            }
            for j in 0..m {
                x.swap((k, j), (pivot, j));
            }
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / d;
            lu[(i, k)] = f;
            for j in k + 1..n {
                let sub = f * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
            for j in 0..m {
                let sub = f * x[(k, j)];
                x[(i, j)] -= sub;
            }
        }
    }
    for j in 0..m {
        for irev in 0..n {
            let i = n - 1 - irev;
            let mut acc = x[(i, j)];
            for k in i + 1..n {
                acc -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc / lu[(i, i)];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn expm_zero_is_identity() {
        let z = Array2::<C64>::zeros((4, 4));
        let e = expm(&z).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(e[(i, j)].re, want, epsilon = 1e-14);
                assert_abs_diff_eq!(e[(i, j)].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn expm_diagonal() {
        let d = array![
            [C64::new(0.3, -1.2), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-7.5, 2.0)]
        ];
        let e = expm(&d).unwrap();
        for i in 0..2 {
            let want = d[(i, i)].exp();
            assert_abs_diff_eq!(e[(i, i)].re, want.re, epsilon = 1e-12);
            assert_abs_diff_eq!(e[(i, i)].im, want.im, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(e[(0, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn expm_pauli_rotation() {
        // exp(i t sigma_x) = cos(t) I + i sin(t) sigma_x
        let t = 2.3f64;
        let it = C64::new(0.0, t);
        let a = array![
            [C64::new(0.0, 0.0), it],
            [it, C64::new(0.0, 0.0)]
        ];
        let e = expm(&a).unwrap();
        assert_abs_diff_eq!(e[(0, 0)].re, t.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(e[(0, 1)].im, t.sin(), epsilon = 1e-12);
    }

    #[test]
    fn lu_solves_random_system() {
        let a = array![
            [C64::new(2.0, 1.0), C64::new(-1.0, 0.5), C64::new(0.0, 0.3)],
            [C64::new(0.1, 0.0), C64::new(3.0, -1.0), C64::new(1.0, 0.0)],
            [C64::new(0.0, -2.0), C64::new(0.5, 0.5), C64::new(1.5, 0.0)]
        ];
        let x_true = array![
            [C64::new(1.0, 0.0)],
            [C64::new(-0.5, 2.0)],
            [C64::new(0.25, -0.75)]
        ];
        let b = a.dot(&x_true);
        let x = lu_solve(&a, &b).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(x[(i, 0)].re, x_true[(i, 0)].re, epsilon = 1e-12);
            assert_abs_diff_eq!(x[(i, 0)].im, x_true[(i, 0)].im, epsilon = 1e-12);
        }
    }
}
