//! Matrix-valued special functions: Pochhammer, Gamma, reciprocal Gamma,
//! Beta, the semi-infinite Beta-type integral, and the generalized
//! hypergeometric function with commuting matrix parameters.
//!
//! Gamma ratios are evaluated as exp(logGamma(a) - logGamma(b)) on joint
//! eigenvalues so large real parts never overflow a double.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{
    apply_scalar_function, commute_defect, is_positive_stable, spectrum, ComplexMatrix,
    JointEigensystem,
};

/// Relative commutation tolerance required of parameter matrices.
pub const COMMUTE_TOL: f64 = 1e-12;

/// Default term cap for the hypergeometric series.
pub const PFQ_MAX_TERMS: usize = 500;

/// Default absolute term tolerance for the hypergeometric series.
pub const PFQ_TOL: f64 = 1e-14;

/// Scalar complex Gamma via the Lanczos approximation (g = 7, 9 coefficients)
/// with the reflection formula for Re(z) < 0.5.
pub mod scalar {
    use num_complex::Complex64;
    use std::f64::consts::PI;

    const LANCZOS_G: f64 = 7.0;
    const LANCZOS_COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];

    /// Nonpositive-integer test, the pole set of Gamma.
    pub fn is_gamma_pole(z: Complex64) -> bool {
        if z.re > 0.5 {
            return false;
        }
        let n = z.re.round();
        n <= 0.0 && (z - Complex64::new(n, 0.0)).norm() < 1e-12 * f64::max(1.0, z.norm())
    }

    fn lgamma_lanczos(z: Complex64) -> Complex64 {
        // valid for Re(z) >= 0.5
        let z = z - Complex64::new(1.0, 0.0);
        let mut x = Complex64::new(LANCZOS_COEFFS[0], 0.0);
        for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            x += Complex64::new(c, 0.0) / (z + Complex64::new(i as f64, 0.0));
        }
        let t = z + Complex64::new(LANCZOS_G + 0.5, 0.0);
        Complex64::new(0.5 * (2.0 * PI).ln(), 0.0)
            + (z + Complex64::new(0.5, 0.0)) * t.ln()
            - t
            + x.ln()
    }

    /// log Gamma; the imaginary part is not branch-normalized, so use it only
    /// under exp (exp(lgamma(z)) = Gamma(z) exactly).
    pub fn lgamma(z: Complex64) -> Complex64 {
        if z.re >= 0.5 {
            lgamma_lanczos(z)
        } else {
            // Gamma(z) Gamma(1-z) = pi / sin(pi z)
            let pi = Complex64::new(PI, 0.0);
            pi.ln() - (pi * z).sin().ln() - lgamma_lanczos(Complex64::new(1.0, 0.0) - z)
        }
    }

    pub fn gamma(z: Complex64) -> Complex64 {
        if is_gamma_pole(z) {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        lgamma(z).exp()
    }

    /// Entire reciprocal Gamma; exactly zero at the poles of Gamma.
    pub fn rgamma(z: Complex64) -> Complex64 {
        if z.re >= 0.5 {
            return (-lgamma_lanczos(z)).exp();
        }
        if is_gamma_pole(z) {
            return Complex64::new(0.0, 0.0);
        }
        let pi = Complex64::new(PI, 0.0);
        (pi * z).sin() / pi * lgamma_lanczos(Complex64::new(1.0, 0.0) - z).exp()
    }
}

fn require_commuting(mats: &[&ComplexMatrix]) -> Result<()> {
    for (i, a) in mats.iter().enumerate() {
        for b in mats.iter().skip(i + 1) {
            let defect = commute_defect(a, b)?;
            if defect > COMMUTE_TOL {
                return Err(Error::Commutation {
                    defect,
                    tol: COMMUTE_TOL,
                });
            }
        }
    }
    Ok(())
}

/// Rising factorial S (S+I) (S+2I) ... (S+(k-1)I); identity for k = 0.
pub fn pochhammer(s: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(s.dim());
    for j in 0..k {
        acc = &acc * &s.shift_re(j as f64);
    }
    acc
}

/// Gamma of a diagonalizable matrix; errors if any eigenvalue is a pole.
pub fn gamma_matrix(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    apply_scalar_function(s, |z| {
        if scalar::is_gamma_pole(z) {
            None
        } else {
            Some(scalar::gamma(z))
        }
    })
}

/// Reciprocal Gamma, entire: defined for every diagonalizable matrix and
/// singular exactly when an eigenvalue sits on a Gamma pole.
pub fn gamma_matrix_inv(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    apply_scalar_function(s, |z| Some(scalar::rgamma(z)))
}

/// Gamma(A) Gamma(B)^{-1} through joint eigenvalues, overflow-free.
///
/// Eigenvalues of B on Gamma poles contribute zero; eigenvalues of A on
/// poles are a domain error.
pub fn log_gamma_ratio(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_commuting(&[a, b])?;
    let joint = JointEigensystem::new(a, b)?;
    joint.apply2(|x, y| {
        if scalar::is_gamma_pole(x) {
            return None;
        }
        if scalar::is_gamma_pole(y) {
            return Some(Complex64::new(0.0, 0.0));
        }
        Some((scalar::lgamma(x) - scalar::lgamma(y)).exp())
    })
}

/// Beta function of a commuting positive-stable pair:
/// B(S,V) = Gamma^{-1}(V+S) Gamma(V) Gamma(S).
pub fn beta_matrix(s: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_commuting(&[s, v])?;
    if !is_positive_stable(s)? {
        return Err(Error::Domain(
            "beta_matrix: first argument is not positive stable".into(),
        ));
    }
    if !is_positive_stable(v)? {
        return Err(Error::Domain(
            "beta_matrix: second argument is not positive stable".into(),
        ));
    }
    let joint = JointEigensystem::new(s, v)?;
    joint.apply2(|x, y| Some((scalar::lgamma(x) + scalar::lgamma(y) - scalar::lgamma(x + y)).exp()))
}

/// The master moment of the weight: int_0^inf u^V (1+u)^{-(S+V)} du,
/// equal to B(S-I, V+I). Requires Re > -1 on the spectrum of V and
/// Re > 1 on the spectrum of S for convergence.
pub fn weight_integral(s: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_commuting(&[s, v])?;
    for z in spectrum(v)? {
        if z.re <= -1.0 {
            return Err(Error::Domain(format!(
                "weight_integral: eigenvalue {z} of the exponent matrix has Re <= -1"
            )));
        }
    }
    for z in spectrum(s)? {
        if z.re <= 1.0 {
            return Err(Error::Domain(format!(
                "weight_integral: eigenvalue {z} of the decay matrix has Re <= 1"
            )));
        }
    }
    let joint = JointEigensystem::new(s, v)?;
    joint.apply2(|x, y| {
        let one = Complex64::new(1.0, 0.0);
        Some((scalar::lgamma(y + one) + scalar::lgamma(x - one) - scalar::lgamma(x + y)).exp())
    })
}

fn as_nonpositive_integer_scalar(m: &ComplexMatrix) -> Option<u64> {
    let p = m.dim();
    let scale = f64::max(1.0, m.norm_frobenius());
    let v = m.get(0, 0);
    for i in 0..p {
        for j in 0..p {
            let want = if i == j { v } else { Complex64::new(0.0, 0.0) };
            if (m.get(i, j) - want).norm() > 1e-12 * scale {
                return None;
            }
        }
    }
    let n = (-v.re).round();
    if n >= 0.0 && (v + Complex64::new(n, 0.0)).norm() <= 1e-12 * scale {
        Some(n as u64)
    } else {
        None
    }
}

/// Generalized hypergeometric series with commuting matrix parameters and a
/// complex scalar argument. Successive terms come from the ratio recursion
/// (V_q+j)^{-1}...(V_1+j)^{-1} (S_1+j)...(S_m+j) z/(j+1); no factorials are
/// ever formed directly. A numerator equal to -nI truncates the series after
/// n+1 terms and takes precedence over the |z| < 1 convergence requirement.
pub fn hypergeometric_pfq(
    numerators: &[ComplexMatrix],
    denominators: &[ComplexMatrix],
    z: Complex64,
    max_terms: usize,
    tol: f64,
) -> Result<ComplexMatrix> {
    if numerators.is_empty() && denominators.is_empty() {
        return Err(Error::Shape(
            "hypergeometric_pfq: at least one parameter matrix is required".into(),
        ));
    }
    let dim = numerators
        .iter()
        .chain(denominators.iter())
        .next()
        .unwrap()
        .dim();
    if numerators
        .iter()
        .chain(denominators.iter())
        .any(|m| m.dim() != dim)
    {
        return Err(Error::Shape(
            "hypergeometric_pfq: parameter matrices must share one dimension".into(),
        ));
    }
    let all: Vec<&ComplexMatrix> = numerators.iter().chain(denominators.iter()).collect();
    require_commuting(&all)?;

    let truncation = numerators
        .iter()
        .filter_map(as_nonpositive_integer_scalar)
        .min();

    if truncation.is_none() && z.norm() > 0.0 {
        if numerators.len() > denominators.len() + 1 {
            return Err(Error::Divergence(format!(
                "{}F{} does not converge for any z != 0 without termination",
                numerators.len(),
                denominators.len()
            )));
        }
        if numerators.len() == denominators.len() + 1 && z.norm() >= 1.0 {
            return Err(Error::Divergence(format!(
                "{}F{} requires |z| < 1, got |z| = {}",
                numerators.len(),
                denominators.len(),
                z.norm()
            )));
        }
    }

    let mut term = ComplexMatrix::identity(dim);
    let mut sum = term.clone();
    for j in 0..max_terms {
        if let Some(n) = truncation {
            if j as u64 >= n {
                return Ok(sum);
            }
        }
        let jf = j as f64;
        let mut num_prod = ComplexMatrix::identity(dim);
        for s in numerators {
            num_prod = &num_prod * &s.shift_re(jf);
        }
        let mut den_prod = ComplexMatrix::identity(dim);
        for v in denominators {
            den_prod = &den_prod * &v.shift_re(jf);
        }
        let den_inv = den_prod.try_inverse().ok_or_else(|| {
            Error::Domain(format!(
                "hypergeometric_pfq: singular denominator shift at term {j}"
            ))
        })?;
        term = (&(&den_inv * &num_prod) * &term).scale(z / Complex64::new(jf + 1.0, 0.0));
        sum = &sum + &term;
        if term.norm_frobenius() < tol {
            return Ok(sum);
        }
    }
    Err(Error::NumericalFailure(format!(
        "hypergeometric series did not reach tolerance {tol:.1e} within {max_terms} terms"
    )))
}

/// The k parameters (Y + jI)/k for j = 0..k-1.
pub fn delta_params(k: u32, y: &ComplexMatrix) -> Vec<ComplexMatrix> {
    (0..k)
        .map(|j| y.shift_re(j as f64).scale_re(1.0 / k as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).norm_frobenius() <= tol * f64::max(1.0, b.norm_frobenius())
    }

    mod scalar_gamma {
        use super::super::scalar::*;
        use super::c;

        #[test]
        fn half_integer_values() {
            let pi = std::f64::consts::PI;
            assert!((gamma(c(0.5, 0.0)).re - pi.sqrt()).abs() < 1e-13);
            assert!((gamma(c(1.5, 0.0)).re - pi.sqrt() / 2.0).abs() < 1e-13);
            assert!(gamma(c(0.5, 0.0)).im.abs() < 1e-15);
        }

        #[test]
        fn integer_values() {
            assert!((gamma(c(1.0, 0.0)).re - 1.0).abs() < 1e-14);
            assert!((gamma(c(10.0, 0.0)).re - 362880.0).abs() < 1e-8 * 362880.0);
        }

        #[test]
        fn frozen_log_gamma() {
            let lg = lgamma(c(10.5, 0.0));
            assert!((lg.re - 13.940_625_219_403_763).abs() < 1e-12);
            assert!(lg.im.abs() < 1e-14);
        }

        #[test]
        fn frozen_complex_values() {
            let g = gamma(c(0.5, 0.5));
            assert!((g - c(0.818_163_999_541_747_4, -0.763_313_828_713_982_6)).norm() < 1e-13);
            let g = gamma(c(3.25, -1.75));
            assert!((g - c(-0.465_669_175_643_624_33, -1.442_245_114_763_083_8)).norm() < 1e-12);
        }

        #[test]
        fn reflection_region() {
            assert!((gamma(c(-1.5, 0.0)).re - 2.363_271_801_207_354_7).abs() < 1e-13);
            assert!((rgamma(c(-2.5, 0.0)).re - -1.057_855_469_152_043).abs() < 1e-13);
        }

        #[test]
        fn rgamma_vanishes_at_poles() {
            for n in [0.0, -1.0, -2.0, -7.0] {
                let r = rgamma(c(n, 0.0));
                assert_eq!(r, c(0.0, 0.0), "rgamma({n}) must be exactly zero");
                assert!(is_gamma_pole(c(n, 0.0)));
            }
            assert!(!is_gamma_pole(c(-2.5, 0.0)));
            assert!(!is_gamma_pole(c(2.0, 0.0)));
            assert!(!is_gamma_pole(c(-2.0, 0.5)));
        }

        #[test]
        fn rgamma_is_reciprocal() {
            for z in [c(0.7, 0.0), c(3.25, -1.75), c(-1.3, 0.4), c(25.5, 0.0)] {
                let prod = gamma(z) * rgamma(z);
                assert!((prod - c(1.0, 0.0)).norm() < 1e-12, "z = {z}");
            }
        }

        #[test]
        fn recurrence_z_gamma_z() {
            for z in [c(0.3, 0.0), c(4.5, 1.0), c(-0.7, -0.2)] {
                let lhs = gamma(z + c(1.0, 0.0));
                let rhs = z * gamma(z);
                assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn pochhammer_k0_is_identity() {
        let s = ComplexMatrix::from_diagonal(&[c(3.0, 1.0), c(-2.0, 0.0)]);
        assert!(close(&pochhammer(&s, 0), &ComplexMatrix::identity(2), 0.0));
    }

    #[test]
    fn pochhammer_annihilates_negative_integer() {
        let s = ComplexMatrix::scalar(2, c(-2.0, 0.0));
        let p = pochhammer(&s, 3);
        assert!(p.norm_frobenius() < 1e-14);
    }

    #[test]
    fn pochhammer_diagonal() {
        let s = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let p = pochhammer(&s, 2);
        let expect = ComplexMatrix::from_diagonal(&[c(2.0, 0.0), c(6.0, 0.0)]);
        assert!(close(&p, &expect, 1e-14));
    }

    #[test]
    fn pochhammer_gamma_consistency() {
        let s = ComplexMatrix::from_diagonal(&[c(0.5, 0.0), c(2.25, 0.5)]);
        for k in 0..=8 {
            let lhs = pochhammer(&s, k);
            let rhs = &gamma_matrix_inv(&s).unwrap()
                * &gamma_matrix(&s.shift_re(k as f64)).unwrap();
            assert!(close(&lhs, &rhs, 1e-9), "k = {k}");
        }
    }

    #[test]
    fn gamma_matrix_examples() {
        assert!(close(
            &gamma_matrix(&ComplexMatrix::identity(2)).unwrap(),
            &ComplexMatrix::identity(2),
            1e-14
        ));
        let m = ComplexMatrix::from_diagonal(&[c(2.0, 0.0), c(3.0, 0.0)]);
        let expect = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(close(&gamma_matrix(&m).unwrap(), &expect, 1e-13));
        let m = ComplexMatrix::from_diagonal(&[c(0.5, 0.0), c(1.5, 0.0)]);
        let pi = std::f64::consts::PI;
        let expect = ComplexMatrix::from_diagonal(&[c(pi.sqrt(), 0.0), c(pi.sqrt() / 2.0, 0.0)]);
        assert!(close(&gamma_matrix(&m).unwrap(), &expect, 1e-13));
    }

    #[test]
    fn gamma_matrix_pole_rejected() {
        let m = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(gamma_matrix(&m), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_matrix_inv_examples() {
        let m = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let expect = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(close(&gamma_matrix_inv(&m).unwrap(), &expect, 1e-14));
        let m = ComplexMatrix::from_diagonal(&[c(3.0, 0.0), c(4.0, 0.0)]);
        let expect = ComplexMatrix::from_diagonal(&[c(0.5, 0.0), c(1.0 / 6.0, 0.0)]);
        assert!(close(&gamma_matrix_inv(&m).unwrap(), &expect, 1e-13));
    }

    #[test]
    fn gamma_times_reciprocal_is_identity() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(4.0, 0.0), c(1.0, 0.5)],
            vec![c(0.2, -0.1), c(6.5, 0.0)],
        ])
        .unwrap();
        let prod = &gamma_matrix(&m).unwrap() * &gamma_matrix_inv(&m).unwrap();
        assert!(close(&prod, &ComplexMatrix::identity(2), 1e-10));
    }

    #[test]
    fn log_gamma_ratio_same_matrix() {
        let s = ComplexMatrix::from_diagonal(&[c(4.5, 0.0), c(7.0, 1.0)]);
        assert!(close(
            &log_gamma_ratio(&s, &s).unwrap(),
            &ComplexMatrix::identity(2),
            1e-13
        ));
    }

    #[test]
    fn log_gamma_ratio_integer_case() {
        let a = ComplexMatrix::from_diagonal(&[c(5.0, 0.0)]);
        let b = ComplexMatrix::from_diagonal(&[c(3.0, 0.0)]);
        let r = log_gamma_ratio(&a, &b).unwrap();
        assert!((r.get(0, 0) - c(12.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn log_gamma_ratio_large_arguments() {
        let a = ComplexMatrix::from_diagonal(&[c(100.5, 0.0)]);
        let b = ComplexMatrix::from_diagonal(&[c(100.0, 0.0)]);
        let r = log_gamma_ratio(&a, &b).unwrap();
        assert!((r.get(0, 0).re - 9.987_507_861_262_518).abs() < 1e-10);
    }

    #[test]
    fn log_gamma_ratio_pole_in_denominator_gives_zero() {
        let a = ComplexMatrix::from_diagonal(&[c(2.0, 0.0)]);
        let b = ComplexMatrix::from_diagonal(&[c(-3.0, 0.0)]);
        let r = log_gamma_ratio(&a, &b).unwrap();
        assert!(r.get(0, 0).norm() < 1e-14);
    }

    #[test]
    fn log_gamma_ratio_rejects_noncommuting() {
        let a = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 2.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            log_gamma_ratio(&a, &b),
            Err(Error::Commutation { .. })
        ));
    }

    #[test]
    fn beta_matrix_examples() {
        let i1 = ComplexMatrix::identity(1);
        assert!(close(&beta_matrix(&i1, &i1).unwrap(), &i1, 1e-13));
        let two = ComplexMatrix::from_diagonal(&[c(2.0, 0.0)]);
        let b = beta_matrix(&two, &two).unwrap();
        assert!((b.get(0, 0).re - 1.0 / 6.0).abs() < 1e-13);
        let half = ComplexMatrix::from_diagonal(&[c(0.5, 0.0)]);
        let b = beta_matrix(&half, &half).unwrap();
        assert!((b.get(0, 0).re - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn beta_matrix_rejects_unstable() {
        let bad = ComplexMatrix::from_diagonal(&[c(-1.0, 0.0)]);
        let good = ComplexMatrix::from_diagonal(&[c(2.0, 0.0)]);
        assert!(matches!(beta_matrix(&bad, &good), Err(Error::Domain(_))));
        assert!(matches!(beta_matrix(&good, &bad), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_matrix_symmetry() {
        let s = ComplexMatrix::from_diagonal(&[c(1.5, 0.0), c(2.25, 0.0)]);
        let v = ComplexMatrix::from_diagonal(&[c(3.0, 0.0), c(0.75, 0.0)]);
        let bv = beta_matrix(&s, &v).unwrap();
        let vb = beta_matrix(&v, &s).unwrap();
        assert!(close(&bv, &vb, 1e-12));
    }

    #[test]
    fn weight_integral_scalar_oracles() {
        // int_0^inf (1+u)^{-3} du = 1/2 and int_0^inf (1+u)^{-2} du = 1
        let v0 = ComplexMatrix::from_diagonal(&[c(0.0, 0.0)]);
        let s3 = ComplexMatrix::from_diagonal(&[c(3.0, 0.0)]);
        let s2 = ComplexMatrix::from_diagonal(&[c(2.0, 0.0)]);
        assert!((weight_integral(&s3, &v0).unwrap().get(0, 0).re - 0.5).abs() < 1e-13);
        assert!((weight_integral(&s2, &v0).unwrap().get(0, 0).re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn weight_integral_diagonal_reduction() {
        let s = ComplexMatrix::from_diagonal(&[c(4.0, 0.0), c(5.0, 0.0)]);
        let v = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(1.0, 0.0)]);
        let w = weight_integral(&s, &v).unwrap();
        for (i, (sv, vv)) in [(4.0, 1.0), (5.0, 1.0)].iter().enumerate() {
            let expect = scalar::gamma(c(vv + 1.0, 0.0)) * scalar::gamma(c(sv - 1.0, 0.0))
                / scalar::gamma(c(sv + vv, 0.0));
            assert!((w.get(i, i) - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn weight_integral_guards() {
        let s = ComplexMatrix::from_diagonal(&[c(0.5, 0.0)]);
        let v = ComplexMatrix::from_diagonal(&[c(0.0, 0.0)]);
        assert!(matches!(weight_integral(&s, &v), Err(Error::Domain(_))));
        let s = ComplexMatrix::from_diagonal(&[c(3.0, 0.0)]);
        let v = ComplexMatrix::from_diagonal(&[c(-1.5, 0.0)]);
        assert!(matches!(weight_integral(&s, &v), Err(Error::Domain(_))));
    }

    #[test]
    fn pfq_zero_numerator_truncates_immediately() {
        let zero = ComplexMatrix::zeros(2);
        let den = ComplexMatrix::from_diagonal(&[c(3.0, 0.0), c(4.0, 0.0)]);
        let f = hypergeometric_pfq(&[zero], &[den], c(0.9, 0.0), PFQ_MAX_TERMS, PFQ_TOL).unwrap();
        assert!(close(&f, &ComplexMatrix::identity(2), 0.0));
    }

    #[test]
    fn pfq_scalar_2f1_terminating() {
        // 2F1(-1, 2; 3; 0.4) = 1 - 2*0.4/3
        let a = ComplexMatrix::from_diagonal(&[c(-1.0, 0.0)]);
        let b = ComplexMatrix::from_diagonal(&[c(2.0, 0.0)]);
        let cden = ComplexMatrix::from_diagonal(&[c(3.0, 0.0)]);
        let f =
            hypergeometric_pfq(&[a, b], &[cden], c(0.4, 0.0), PFQ_MAX_TERMS, PFQ_TOL).unwrap();
        assert!((f.get(0, 0).re - 0.733_333_333_333_333_3).abs() < 1e-15);
    }

    #[test]
    fn pfq_binomial_series() {
        // 1F0(1.5;;0.3) = 0.7^{-1.5}
        let a = ComplexMatrix::from_diagonal(&[c(1.5, 0.0)]);
        let f = hypergeometric_pfq(&[a], &[], c(0.3, 0.0), PFQ_MAX_TERMS, PFQ_TOL).unwrap();
        assert!((f.get(0, 0).re - 1.707_469_441_906_276_8).abs() < 1e-13);
    }

    #[test]
    fn pfq_divergence_detected() {
        let a = ComplexMatrix::from_diagonal(&[c(1.5, 0.0)]);
        let r = hypergeometric_pfq(&[a], &[], c(1.5, 0.0), PFQ_MAX_TERMS, PFQ_TOL);
        assert!(matches!(r, Err(Error::Divergence(_))));
    }

    #[test]
    fn pfq_termination_beats_divergence() {
        // numerator -2I terminates, so |z| >= 1 is fine
        let a = ComplexMatrix::scalar(1, c(-2.0, 0.0));
        let b = ComplexMatrix::from_diagonal(&[c(1.5, 0.0)]);
        let f = hypergeometric_pfq(&[a, b], &[], c(2.0, 0.0), PFQ_MAX_TERMS, PFQ_TOL).unwrap();
        // sum_{j=0}^{2} (-2)_j (1.5)_j 2^j / j! = 1 - 2*1.5*2 + 2*(1.5*2.5)*4/2
        assert!((f.get(0, 0).re - (1.0 - 6.0 + 15.0)).abs() < 1e-13);
    }

    #[test]
    fn pfq_singular_denominator_shift() {
        let a = ComplexMatrix::from_diagonal(&[c(0.5, 0.0)]);
        let den = ComplexMatrix::from_diagonal(&[c(-2.0, 0.0)]);
        let r = hypergeometric_pfq(&[a], &[den], c(0.1, 0.0), PFQ_MAX_TERMS, PFQ_TOL);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn delta_params_examples() {
        let y = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let d = delta_params(1, &y);
        assert_eq!(d.len(), 1);
        assert!(close(&d[0], &y, 0.0));

        let y = ComplexMatrix::scalar(2, c(2.0, 0.0));
        let d = delta_params(2, &y);
        assert!(close(&d[0], &ComplexMatrix::identity(2), 1e-15));
        assert!(close(&d[1], &ComplexMatrix::scalar(2, c(1.5, 0.0)), 1e-15));

        let y = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(3.0, 0.0)]);
        let d = delta_params(3, &y);
        let expect = [
            ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]),
            ComplexMatrix::from_diagonal(&[c(1.0 / 3.0, 0.0), c(4.0 / 3.0, 0.0)]),
            ComplexMatrix::from_diagonal(&[c(2.0 / 3.0, 0.0), c(5.0 / 3.0, 0.0)]),
        ];
        for (got, want) in d.iter().zip(expect.iter()) {
            assert!(close(got, want, 1e-15));
        }
    }
}
