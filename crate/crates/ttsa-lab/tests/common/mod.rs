//! Shared oracles for the integration suites. The matrix exponential and the
//! quadrature below live only in test code: they independently verify the
//! production Lyapunov path and never back it.

#![allow(dead_code)]

use nalgebra::DMatrix;

/// Matrix exponential by scaling-and-squaring with the (13, 13) Pade
/// approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    assert_eq!(d, a.ncols());
    // 1-norm (max column sum)
    let norm = (0..d)
        .map(|j| (0..d).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let theta13 = 5.371920351148152;
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as u32
    } else {
        0
    };
    let a_scaled = a / 2f64.powi(s as i32);
    let mut e = pade13(&a_scaled);
    for _ in 0..s {
        e = &e * &e;
    }
    e
}

fn pade13(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    let b: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let eye = DMatrix::identity(d, d);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u = a * (&a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2)
        + b[7] * &a6
        + b[5] * &a4
        + b[3] * &a2
        + b[1] * &eye);
    let v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2)
        + b[6] * &a6
        + b[4] * &a4
        + b[2] * &a2
        + b[0] * &eye;
    (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .expect("Pade denominator is invertible")
}

/// Quadrature oracle for `int_0^infty exp(tK) U exp(tKᵀ) dt`: composite
/// 12-point Gauss-Legendre on [0, T] with T chosen so the discarded tail is
/// far below 1e-12.
pub fn lyapunov_quadrature(k: &DMatrix<f64>, u: &DMatrix<f64>) -> DMatrix<f64> {
    let d = k.nrows();
    let eigs = k.complex_eigenvalues();
    let max_re = eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    assert!(max_re < 0.0, "oracle needs a Hurwitz matrix");
    let rate = -max_re;
    let t_end = 40.0 / rate;
    let panels = 80usize;
    let h = t_end / panels as f64;

    // 12-point Gauss-Legendre nodes/weights on [-1, 1]
    let nodes = [
        -0.981560634246719,
        -0.904117256370475,
        -0.769902674194305,
        -0.587317954286617,
        -0.367831498998180,
        -0.125233408511469,
        0.125233408511469,
        0.367831498998180,
        0.587317954286617,
        0.769902674194305,
        0.904117256370475,
        0.981560634246719,
    ];
    let weights = [
        0.047175336386512,
        0.106939325995318,
        0.160078328543346,
        0.203167426723066,
        0.233492536538355,
        0.249147045813403,
        0.249147045813403,
        0.233492536538355,
        0.203167426723066,
        0.160078328543346,
        0.106939325995318,
        0.047175336386512,
    ];

    let mut acc = DMatrix::zeros(d, d);
    for p in 0..panels {
        let lo = p as f64 * h;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            let t = lo + 0.5 * h * (x + 1.0);
            let e = expm(&(k * t));
            acc += (w * 0.5 * h) * (&e * u * e.transpose());
        }
    }
    acc
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert!((expm(&z) - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn expm_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -2.0, 0.3]));
        let e = expm(&a);
        assert!((e[(0, 0)] - 1f64.exp()).abs() < 1e-13);
        assert!((e[(1, 1)] - (-2f64).exp()).abs() < 1e-14);
        assert!((e[(2, 2)] - 0.3f64.exp()).abs() < 1e-14);
        assert!(e[(0, 1)].abs() < 1e-16);
    }

    #[test]
    fn expm_additivity_on_commuting_arguments() {
        let a = DMatrix::from_row_slice(2, 2, &[0.3, 1.2, -0.7, 0.1]);
        let lhs = expm(&(2.0 * &a));
        let e = expm(&a);
        let rhs = &e * &e;
        assert!((lhs - rhs).amax() < 1e-12);
    }
}
