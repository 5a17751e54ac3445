//! The biorthogonal matrix polynomial pair and its polynomial calculus.
//!
//! Families are built in the monomial basis with matrix coefficients, so
//! every identity downstream can be checked coefficient-wise instead of
//! pointwise. The first family has degree upsilon*n with support only on
//! powers u^{upsilon*j}; the second family has degree n.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{commute_defect, spectrum, ComplexMatrix, Eigensystem, JointEigensystem};
use crate::special::{
    delta_params, hypergeometric_pfq, log_gamma_ratio, pochhammer, COMMUTE_TOL, PFQ_MAX_TERMS,
    PFQ_TOL,
};

/// Trailing-coefficient trim threshold, relative to the largest coefficient norm.
pub const TRIM_REL_TOL: f64 = 1e-14;

/// Commutation tolerance between an operator parameter matrix and polynomial
/// coefficients.
pub const OPERATOR_COMMUTE_TOL: f64 = 1e-10;

const BINOMIAL_MAX_N: u32 = 30;

/// Exact binomial coefficient in 128-bit integer arithmetic; n is capped at 30.
pub fn binomial(n: u32, k: u32) -> u128 {
    assert!(
        n <= BINOMIAL_MAX_N,
        "binomial: n = {n} exceeds the exactness guard {BINOMIAL_MAX_N}"
    );
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Exact factorial, same 128-bit guard as [`binomial`].
pub fn factorial(n: u32) -> u128 {
    assert!(
        n <= BINOMIAL_MAX_N,
        "factorial: n = {n} exceeds the exactness guard {BINOMIAL_MAX_N}"
    );
    (1..=n as u128).product()
}

fn neg_one_pow(k: u32) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Validated parameter set (H, C, upsilon, max_degree) for the polynomial pair.
///
/// The strict constructor enforces the full spectral conditions needed for the
/// weight integrals to exist up to degree `max_degree`. The relaxed one keeps
/// only the algebraic requirements (commutation, simultaneous
/// diagonalizability, C off the singular set of the coefficient formulas) and
/// is what the shifted parameter sets inside recurrences go through.
#[derive(Clone, Debug)]
pub struct ParamSet {
    h: ComplexMatrix,
    c: ComplexMatrix,
    upsilon: u32,
    max_degree: u32,
}

impl ParamSet {
    pub fn new(h: ComplexMatrix, c: ComplexMatrix, upsilon: u32, max_degree: u32) -> Result<Self> {
        let set = Self::new_relaxed(h, c, upsilon, max_degree)?;
        for z in spectrum(&set.c)? {
            if z.re <= -1.0 {
                return Err(Error::SpectralCondition {
                    condition: format!(
                        "Re(z) > -1 for every eigenvalue z of C (found {z})"
                    ),
                });
            }
        }
        let bound = 1.0 + (1 + set.upsilon) as f64 * set.max_degree as f64;
        for x in spectrum(&set.h)? {
            if x.re <= bound {
                return Err(Error::SpectralCondition {
                    condition: format!(
                        "Re(x) > 1 + (1+upsilon)*max_degree = {bound} for every eigenvalue x of H (found {x})"
                    ),
                });
            }
        }
        Ok(set)
    }

    /// Skips the degree-dependent bound on the spectrum of H and the Re > -1
    /// bound on C; keeps commutation, diagonalizability, and the requirement
    /// that no eigenvalue of C sits on a negative integer (where the
    /// coefficient formulas lose invertibility).
    pub fn new_relaxed(
        h: ComplexMatrix,
        c: ComplexMatrix,
        upsilon: u32,
        max_degree: u32,
    ) -> Result<Self> {
        if h.dim() != c.dim() {
            return Err(Error::Shape(format!(
                "parameter matrices have dimensions {} and {}",
                h.dim(),
                c.dim()
            )));
        }
        if upsilon == 0 {
            return Err(Error::SpectralCondition {
                condition: "upsilon must be a positive integer".into(),
            });
        }
        let defect = commute_defect(&h, &c)?;
        if defect > COMMUTE_TOL {
            return Err(Error::SpectralCondition {
                condition: format!(
                    "HC = CH (relative commute defect {defect:.3e} exceeds {COMMUTE_TOL:.1e})"
                ),
            });
        }
        for m in [&h, &c] {
            Eigensystem::new(m).map_err(|e| Error::SpectralCondition {
                condition: format!("H and C must be diagonalizable with bounded condition: {e}"),
            })?;
        }
        JointEigensystem::new(&h, &c).map_err(|_| Error::SpectralCondition {
            condition: "H and C must be simultaneously diagonalizable".into(),
        })?;
        for z in spectrum(&c)? {
            let k = z.re.round();
            if k <= -1.0 && (z - Complex64::new(k, 0.0)).norm() < 1e-9 {
                return Err(Error::SpectralCondition {
                    condition: format!(
                        "eigenvalues of C must avoid the negative integers (found {z})"
                    ),
                });
            }
        }
        Ok(Self {
            h,
            c,
            upsilon,
            max_degree,
        })
    }

    /// Relaxed set with H and C shifted by real multiples of the identity.
    pub fn with_shifts(&self, h_shift: f64, c_shift: f64, max_degree: u32) -> Result<Self> {
        Self::new_relaxed(
            self.h.shift_re(h_shift),
            self.c.shift_re(c_shift),
            self.upsilon,
            max_degree,
        )
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn upsilon(&self) -> u32 {
        self.upsilon
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    fn check_degree(&self, n: u32) -> Result<()> {
        if n > self.max_degree {
            return Err(Error::Domain(format!(
                "degree {n} exceeds max_degree {} of the parameter set",
                self.max_degree
            )));
        }
        Ok(())
    }
}

/// Polynomial in a scalar variable with p x p complex matrix coefficients,
/// `coeffs[k]` multiplying u^k. Trailing coefficients below
/// [`TRIM_REL_TOL`] times the largest coefficient norm are dropped.
#[derive(Clone, Debug)]
pub struct MatrixPoly {
    dim: usize,
    coeffs: Vec<ComplexMatrix>,
}

impl MatrixPoly {
    pub fn from_coeffs(coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = match coeffs.first() {
            Some(c) => c.dim(),
            None => return Err(Error::Shape("polynomial needs at least one coefficient".into())),
        };
        if coeffs.iter().any(|c| c.dim() != dim) {
            return Err(Error::Shape(
                "polynomial coefficients must share one dimension".into(),
            ));
        }
        let mut poly = Self { dim, coeffs };
        poly.trim();
        Ok(poly)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            coeffs: vec![ComplexMatrix::zeros(dim)],
        }
    }

    pub fn constant(m: ComplexMatrix) -> Self {
        Self {
            dim: m.dim(),
            coeffs: vec![m],
        }
    }

    fn trim(&mut self) {
        let max_norm = self
            .coeffs
            .iter()
            .map(|c| c.norm_frobenius())
            .fold(0.0_f64, f64::max);
        let threshold = TRIM_REL_TOL * max_norm;
        while self.coeffs.len() > 1
            && self.coeffs.last().map(|c| c.norm_frobenius() <= threshold) == Some(true)
        {
            self.coeffs.pop();
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    /// Coefficient of u^k; zero matrix beyond the degree.
    pub fn coeff(&self, k: usize) -> ComplexMatrix {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.dim))
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.norm_frobenius())
            .fold(0.0_f64, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, u: Complex64) -> ComplexMatrix {
        let mut acc = self.coeffs.last().cloned().unwrap();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = &acc.scale(u) + c;
        }
        acc
    }

    pub fn eval_re(&self, u: f64) -> ComplexMatrix {
        self.eval(Complex64::new(u, 0.0))
    }

    /// d/du, term by term.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(self.dim);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale_re(k as f64))
            .collect();
        Self::from_coeffs(coeffs).unwrap()
    }

    /// Term-by-term antiderivative with zero constant term.
    pub fn integral(&self) -> Self {
        let mut coeffs = vec![ComplexMatrix::zeros(self.dim)];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.scale_re(1.0 / (k + 1) as f64));
        }
        Self::from_coeffs(coeffs).unwrap()
    }

    /// Euler operator u d/du: A_k u^k -> k A_k u^k.
    pub fn euler_apply(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.scale_re(k as f64))
            .collect();
        Self::from_coeffs(coeffs).unwrap()
    }

    /// Pochhammer of the shifted Euler operator: applies
    /// prod_{j=0}^{k-1} (uD + B + jI), acting on the monomial A_m u^m as
    /// multiplication by (B + mI)_k. B must commute with every coefficient.
    pub fn operator_pochhammer_apply(&self, b: &ComplexMatrix, k: usize) -> Result<Self> {
        if b.dim() != self.dim {
            return Err(Error::Shape(
                "operator parameter dimension does not match polynomial".into(),
            ));
        }
        for c in &self.coeffs {
            let defect = commute_defect(b, c)?;
            if defect > OPERATOR_COMMUTE_TOL {
                return Err(Error::Commutation {
                    defect,
                    tol: OPERATOR_COMMUTE_TOL,
                });
            }
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| &pochhammer(&b.shift_re(m as f64), k) * c)
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| &self.coeff(k) + &other.coeff(k))
            .collect();
        Self::from_coeffs(coeffs).unwrap()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| &self.coeff(k) - &other.coeff(k))
            .collect();
        Self::from_coeffs(coeffs).unwrap()
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c.scale(z)).collect(),
        }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(Complex64::new(x, 0.0))
    }

    /// Left-multiplies every coefficient by M.
    pub fn mul_matrix_left(&self, m: &ComplexMatrix) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| m * c).collect(),
        }
    }

    /// Multiplies by z u^shift.
    pub fn mul_monomial(&self, z: Complex64, shift: usize) -> Self {
        let mut coeffs = vec![ComplexMatrix::zeros(self.dim); shift];
        coeffs.extend(self.coeffs.iter().map(|c| c.scale(z)));
        Self::from_coeffs(coeffs).unwrap()
    }
}

/// First family member of degree exactly upsilon*n: support on powers
/// u^{upsilon*j} with coefficient
/// (-1)^{j+n} binom(n,j) ((n+1)I-H)_{uj} (I+C)_{un} ((I+C)_{uj})^{-1} (-1)^{uj}.
pub fn m_first(params: &ParamSet, n: u32) -> Result<MatrixPoly> {
    params.check_degree(n)?;
    let p = params.dim();
    let v = params.upsilon;
    let ic = params.c.shift_re(1.0);
    let nh = &ComplexMatrix::scalar(p, Complex64::new((n + 1) as f64, 0.0)) - &params.h;
    let poch_ic_vn = pochhammer(&ic, (v * n) as usize);

    let mut coeffs = vec![ComplexMatrix::zeros(p); (v * n + 1) as usize];
    for j in 0..=n {
        let vj = (v * j) as usize;
        let poch_nh = pochhammer(&nh, vj);
        let poch_ic_inv = pochhammer(&ic, vj).try_inverse().ok_or_else(|| {
            Error::Domain(format!("singular Pochhammer factor (I+C)_{{{vj}}}"))
        })?;
        let scale = neg_one_pow(j + n) * binomial(n, j) as f64 * neg_one_pow(v * j);
        coeffs[vj] = (&(&poch_nh * &poch_ic_vn) * &poch_ic_inv).scale_re(scale);
    }
    MatrixPoly::from_coeffs(coeffs)
}

/// Hypergeometric evaluation of the first family:
/// F(-nI, Delta(u,(n+1)I-H); Delta(u,C+I); (-u)^u) times the constant
/// (-1)^n Gamma^{-1}(I+C) Gamma(C+(1+un)I).
pub fn m_first_hypergeometric(params: &ParamSet, n: u32, u: f64) -> Result<ComplexMatrix> {
    params.check_degree(n)?;
    let p = params.dim();
    let v = params.upsilon;
    let mut nums = vec![ComplexMatrix::scalar(p, Complex64::new(-(n as f64), 0.0))];
    let nh = &ComplexMatrix::scalar(p, Complex64::new((n + 1) as f64, 0.0)) - &params.h;
    nums.extend(delta_params(v, &nh));
    let dens = delta_params(v, &params.c.shift_re(1.0));
    let z = Complex64::new(-u, 0.0).powu(v);
    let f = hypergeometric_pfq(&nums, &dens, z, PFQ_MAX_TERMS, PFQ_TOL)?;
    let prefactor = log_gamma_ratio(
        &params.c.shift_re(1.0 + (v * n) as f64),
        &params.c.shift_re(1.0),
    )?
    .scale_re(neg_one_pow(n));
    Ok(&f * &prefactor)
}

/// Second family member of degree exactly n: the double sum over (s, j) of
/// [(-1)^{j+n}/s!] binom(s,j) ((1/u)((j+1)I+C))_n (H+C-nI)_s u^s (1+u)^{n-s},
/// expanded into the monomial basis with exact binomials.
pub fn m_second(params: &ParamSet, n: u32) -> Result<MatrixPoly> {
    params.check_degree(n)?;
    let p = params.dim();
    let v = params.upsilon;
    let hc_n = (&params.h + &params.c).shift_re(-(n as f64));

    let mut coeffs = vec![ComplexMatrix::zeros(p); (n + 1) as usize];
    for s in 0..=n {
        let poch_hc = pochhammer(&hc_n, s as usize);
        let s_fact = factorial(s) as f64;
        for j in 0..=s {
            let base = params
                .c
                .shift_re((j + 1) as f64)
                .scale_re(1.0 / v as f64);
            let poch_c = pochhammer(&base, n as usize);
            let scale = neg_one_pow(j + n) * binomial(s, j) as f64 / s_fact;
            let term = (&poch_c * &poch_hc).scale_re(scale);
            // u^s (1+u)^{n-s}
            for r in 0..=(n - s) {
                let k = (s + r) as usize;
                coeffs[k] = &coeffs[k] + &term.scale_re(binomial(n - s, r) as f64);
            }
        }
    }
    MatrixPoly::from_coeffs(coeffs)
}

/// Coefficient-space residual of the differential equation
/// [uD (uD + C + (1-u)I)_u - (-u)^u (uD - un)(uD + (n+1)I - H)_u] M_n.
/// Zero (to rounding) when the equation holds.
pub fn ode_residual(params: &ParamSet, n: u32) -> Result<MatrixPoly> {
    let m = m_first(params, n)?;
    let p = params.dim();
    let v = params.upsilon as usize;

    let arg1 = params.c.shift_re(1.0 - v as f64);
    let branch1 = m.operator_pochhammer_apply(&arg1, v)?.euler_apply();

    let arg2 = &ComplexMatrix::scalar(p, Complex64::new((n + 1) as f64, 0.0)) - &params.h;
    let inner = m.operator_pochhammer_apply(&arg2, v)?;
    let vn = (params.upsilon * n) as f64;
    let after_euler = inner.euler_apply().sub(&inner.scale_re(vn));
    let branch2 = after_euler.mul_monomial(Complex64::new(neg_one_pow(v as u32), 0.0), v);

    Ok(branch1.sub(&branch2))
}

/// Max branch coefficient norm, the natural scale for [`ode_residual`].
pub fn ode_branch_scale(params: &ParamSet, n: u32) -> Result<f64> {
    let m = m_first(params, n)?;
    let p = params.dim();
    let v = params.upsilon as usize;
    let arg1 = params.c.shift_re(1.0 - v as f64);
    let branch1 = m.operator_pochhammer_apply(&arg1, v)?.euler_apply();
    let arg2 = &ComplexMatrix::scalar(p, Complex64::new((n + 1) as f64, 0.0)) - &params.h;
    let inner = m.operator_pochhammer_apply(&arg2, v)?;
    let vn = (params.upsilon * n) as f64;
    let branch2 = inner
        .euler_apply()
        .sub(&inner.scale_re(vn))
        .mul_monomial(Complex64::new(neg_one_pow(v as u32), 0.0), v);
    Ok(f64::max(branch1.max_coeff_norm(), branch2.max_coeff_norm()))
}

fn jacobi_inner(params: &ParamSet, n: u32) -> Result<ParamSet> {
    let swapped_h = -&(&params.h + &params.c);
    ParamSet::new_relaxed(swapped_h, params.h.clone(), params.upsilon, n)
}

/// First Jacobi-type family through the substitution route:
/// J_n(u) = ((-1)^n / n!) M_n with parameters (-H-C, H) at (u-1)/2.
pub fn jacobi_first(params: &ParamSet, n: u32, u: f64) -> Result<ComplexMatrix> {
    let inner = jacobi_inner(params, n)?;
    let m = m_first(&inner, n)?;
    let val = m.eval(Complex64::new((u - 1.0) / 2.0, 0.0));
    Ok(val.scale_re(neg_one_pow(n) / factorial(n) as f64))
}

/// Same value through the hypergeometric form:
/// (1/n!) Gamma((1+un)I+H) Gamma^{-1}(H+I)
/// F(-nI, Delta(u, C+H+(n+1)I); Delta(u, I+H); ((1-u)/2)^u).
pub fn jacobi_first_hypergeometric(params: &ParamSet, n: u32, u: f64) -> Result<ComplexMatrix> {
    let p = params.dim();
    let v = params.upsilon;
    let mut nums = vec![ComplexMatrix::scalar(p, Complex64::new(-(n as f64), 0.0))];
    let chn = (&params.c + &params.h).shift_re((n + 1) as f64);
    nums.extend(delta_params(v, &chn));
    let dens = delta_params(v, &params.h.shift_re(1.0));
    let z = Complex64::new((1.0 - u) / 2.0, 0.0).powu(v);
    let f = hypergeometric_pfq(&nums, &dens, z, PFQ_MAX_TERMS, PFQ_TOL)?;
    let prefactor = log_gamma_ratio(
        &params.h.shift_re(1.0 + (v * n) as f64),
        &params.h.shift_re(1.0),
    )?;
    Ok((&prefactor * &f).scale_re(1.0 / factorial(n) as f64))
}

/// Second Jacobi-type family, substitution route on the second family.
pub fn jacobi_second(params: &ParamSet, n: u32, u: f64) -> Result<ComplexMatrix> {
    let inner = jacobi_inner(params, n)?;
    let m = m_second(&inner, n)?;
    let val = m.eval(Complex64::new((u - 1.0) / 2.0, 0.0));
    Ok(val.scale_re(neg_one_pow(n) / factorial(n) as f64))
}
