//! Dense complex matrices and functional calculus for diagonalizable matrices.
//!
//! Everything downstream treats a `ComplexMatrix` as its scalar type. Scalar
//! functions are lifted through an explicit eigendecomposition: Schur form,
//! triangular back-substitution for the eigenvectors, then V f(D) V^{-1}.
//! Non-diagonalizable or badly conditioned inputs are rejected.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default cap on the eigenvector condition number.
pub const DEFAULT_COND_MAX: f64 = 1e8;

/// Tolerance for the V diag(λ) V^{-1} reconstruction check.
pub const RECONSTRUCT_TOL: f64 = 1e-10;

/// Off-diagonal tolerance when checking simultaneous diagonalization.
pub const JOINT_DIAG_TOL: f64 = 1e-9;

const SCHUR_EPS: f64 = 1e-13;
const SCHUR_MAX_ITER: usize = 10_000;

/// Dense p x p complex matrix, row-major construction, immutable after creation.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Builds from row-major entries. Rejects wrong lengths and non-finite values.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be at least 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("matrix entries must be finite".into()));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(dim, dim, &entries),
        })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("rows must form a square matrix".into()));
        }
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    /// z * I.
    pub fn scalar(dim: usize, z: Complex64) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim) * z,
        }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let p = diag.len();
        let mut m = DMatrix::zeros(p, p);
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        Self { inner: m }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    /// Row-major entry list.
    pub fn entries(&self) -> Vec<Complex64> {
        let p = self.dim();
        let mut out = Vec::with_capacity(p * p);
        for i in 0..p {
            for j in 0..p {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.inner.norm()
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            inner: &self.inner * z,
        }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(Complex64::new(x, 0.0))
    }

    /// self + z * I.
    pub fn shift(&self, z: Complex64) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..self.dim() {
            inner[(i, i)] += z;
        }
        Self { inner }
    }

    pub fn shift_re(&self, x: f64) -> Self {
        self.shift(Complex64::new(x, 0.0))
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.inner.clone().try_inverse().map(|inner| Self { inner })
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm_frobenius() <= tol
    }

    fn from_inner(inner: DMatrix<Complex64>) -> Self {
        Self { inner }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix dimension mismatch in add");
        ComplexMatrix::from_inner(&self.inner + &rhs.inner)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix dimension mismatch in sub");
        ComplexMatrix::from_inner(&self.inner - &rhs.inner)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix dimension mismatch in mul");
        ComplexMatrix::from_inner(&self.inner * &rhs.inner)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix::from_inner(-&self.inner)
    }
}

/// Relative commutator norm ||AB - BA||_F / max(1, ||A||_F ||B||_F).
pub fn commute_defect(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "commute_defect: dimensions {} and {} differ",
            a.dim(),
            b.dim()
        )));
    }
    let ab = &a.inner * &b.inner;
    let ba = &b.inner * &a.inner;
    let num = (ab - ba).norm();
    Ok(num / f64::max(1.0, a.norm_frobenius() * b.norm_frobenius()))
}

/// All p eigenvalues, sorted by real then imaginary part.
pub fn spectrum(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if m.dim() == 1 {
        return Ok(vec![m.get(0, 0)]);
    }
    let schur = m
        .inner
        .clone()
        .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut vals: Vec<Complex64> = (0..m.dim()).map(|i| t[(i, i)]).collect();
    sort_eigenvalues(&mut vals);
    Ok(vals)
}

/// True iff every eigenvalue has positive real part.
pub fn is_positive_stable(m: &ComplexMatrix) -> Result<bool> {
    Ok(spectrum(m)?.iter().all(|z| z.re > 0.0))
}

fn sort_eigenvalues(vals: &mut [Complex64]) {
    vals.sort_by(|a, b| {
        a.re.total_cmp(&b.re)
            .then_with(|| a.im.total_cmp(&b.im))
    });
}

/// Eigendecomposition M = V diag(values) V^{-1} with a condition-number guard.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    values: Vec<Complex64>,
    vectors: ComplexMatrix,
    vectors_inv: ComplexMatrix,
    cond: f64,
}

impl Eigensystem {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        Self::with_cond_max(m, DEFAULT_COND_MAX)
    }

    pub fn with_cond_max(m: &ComplexMatrix, cond_max: f64) -> Result<Self> {
        let p = m.dim();
        if p == 1 {
            return Ok(Self {
                values: vec![m.get(0, 0)],
                vectors: ComplexMatrix::identity(1),
                vectors_inv: ComplexMatrix::identity(1),
                cond: 1.0,
            });
        }

        let schur = m
            .inner
            .clone()
            .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
            .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
        let (q, t) = schur.unpack();

        let lambda: Vec<Complex64> = (0..p).map(|i| t[(i, i)]).collect();
        let scale = f64::max(t.norm(), 1e-300);
        let guard = f64::EPSILON * scale;

        // Eigenvectors of the triangular factor by back-substitution; near-zero
        // pivots are clamped to `guard` (defective inputs then surface through
        // the condition-number or reconstruction check).
        let mut v = DMatrix::<Complex64>::zeros(p, p);
        for k in 0..p {
            let mut y = vec![Complex64::new(0.0, 0.0); p];
            y[k] = Complex64::new(1.0, 0.0);
            for j in (0..k).rev() {
                let mut num = Complex64::new(0.0, 0.0);
                for i in (j + 1)..=k {
                    num -= t[(j, i)] * y[i];
                }
                let mut den = t[(j, j)] - lambda[k];
                if den.norm() < guard {
                    den = Complex64::new(guard, 0.0);
                }
                y[j] = num / den;
            }
            let mut col = DMatrix::<Complex64>::zeros(p, 1);
            for i in 0..p {
                col[(i, 0)] = y[i];
            }
            let col = &q * col;
            let nrm = col.norm();
            for i in 0..p {
                v[(i, k)] = col[(i, 0)] / Complex64::new(nrm, 0.0);
            }
        }

        // Deterministic ordering by eigenvalue (re, then im).
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| {
            lambda[a]
                .re
                .total_cmp(&lambda[b].re)
                .then_with(|| lambda[a].im.total_cmp(&lambda[b].im))
        });
        let values: Vec<Complex64> = order.iter().map(|&i| lambda[i]).collect();
        let mut v_sorted = DMatrix::<Complex64>::zeros(p, p);
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..p {
                v_sorted[(i, dst)] = v[(i, src)];
            }
        }

        let vectors = ComplexMatrix::from_inner(v_sorted);
        let vectors_inv = vectors.try_inverse().ok_or(Error::IllConditioned {
            cond: f64::INFINITY,
            max: cond_max,
        })?;
        let cond = vectors.norm_frobenius() * vectors_inv.norm_frobenius();
        if cond > cond_max {
            return Err(Error::IllConditioned {
                cond,
                max: cond_max,
            });
        }

        let sys = Self {
            values,
            vectors,
            vectors_inv,
            cond,
        };
        let rebuilt = sys.apply(|z| Some(z)).expect("identity map cannot fail");
        let err = (&rebuilt - m).norm_frobenius() / f64::max(1.0, m.norm_frobenius());
        if err > RECONSTRUCT_TOL {
            return Err(Error::NumericalFailure(format!(
                "eigendecomposition reconstruction error {err:.3e} exceeds {RECONSTRUCT_TOL:.1e}"
            )));
        }
        Ok(sys)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn cond(&self) -> f64 {
        self.cond
    }

    /// V diag(f(λ_i)) V^{-1}; `None` from `f` means λ_i left its domain.
    pub fn apply<F>(&self, f: F) -> Result<ComplexMatrix>
    where
        F: Fn(Complex64) -> Option<Complex64>,
    {
        let p = self.values.len();
        let mut d = DMatrix::<Complex64>::zeros(p, p);
        for (i, &lam) in self.values.iter().enumerate() {
            d[(i, i)] = f(lam).ok_or_else(|| {
                Error::Domain(format!("eigenvalue {lam} outside the function domain"))
            })?;
        }
        Ok(ComplexMatrix::from_inner(
            &self.vectors.inner * d * &self.vectors_inv.inner,
        ))
    }
}

/// Lifts a scalar function through the eigendecomposition of `m`.
pub fn apply_scalar_function<F>(m: &ComplexMatrix, f: F) -> Result<ComplexMatrix>
where
    F: Fn(Complex64) -> Option<Complex64>,
{
    Eigensystem::new(m)?.apply(f)
}

pub fn apply_scalar_function_with<F>(
    m: &ComplexMatrix,
    f: F,
    cond_max: f64,
) -> Result<ComplexMatrix>
where
    F: Fn(Complex64) -> Option<Complex64>,
{
    Eigensystem::with_cond_max(m, cond_max)?.apply(f)
}

/// Simultaneous diagonalization of a commuting pair: one transform V with
/// V^{-1} A V and V^{-1} B V both diagonal within [`JOINT_DIAG_TOL`].
#[derive(Clone, Debug)]
pub struct JointEigensystem {
    transform: ComplexMatrix,
    inverse: ComplexMatrix,
    a_values: Vec<Complex64>,
    b_values: Vec<Complex64>,
    cond: f64,
}

// Fixed perturbations for diagonalizing A + eps*B; the second is a fallback
// for the unlucky case of eigenvalue collisions at the first.
const JOINT_EPS: [f64; 2] = [0.381_966_011_250_105_1, 0.754_877_666_246_692_7];

impl JointEigensystem {
    pub fn new(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::Shape(format!(
                "joint eigensystem: dimensions {} and {} differ",
                a.dim(),
                b.dim()
            )));
        }
        let p = a.dim();
        if p == 1 {
            return Ok(Self {
                transform: ComplexMatrix::identity(1),
                inverse: ComplexMatrix::identity(1),
                a_values: vec![a.get(0, 0)],
                b_values: vec![b.get(0, 0)],
                cond: 1.0,
            });
        }

        let mut last_err = 0.0_f64;
        for &eps in JOINT_EPS.iter() {
            let probe = a + &b.scale_re(eps);
            let sys = match Eigensystem::new(&probe) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let av = &sys.vectors_inv.inner * &a.inner * &sys.vectors.inner;
            let bv = &sys.vectors_inv.inner * &b.inner * &sys.vectors.inner;
            let off = |m: &DMatrix<Complex64>, scale: f64| -> f64 {
                let mut s = 0.0;
                for i in 0..p {
                    for j in 0..p {
                        if i != j {
                            s += m[(i, j)].norm_sqr();
                        }
                    }
                }
                s.sqrt() / f64::max(1.0, scale)
            };
            let defect = f64::max(
                off(&av, a.norm_frobenius()),
                off(&bv, b.norm_frobenius()),
            );
            last_err = defect;
            if defect <= JOINT_DIAG_TOL {
                return Ok(Self {
                    a_values: (0..p).map(|i| av[(i, i)]).collect(),
                    b_values: (0..p).map(|i| bv[(i, i)]).collect(),
                    cond: sys.cond,
                    transform: sys.vectors,
                    inverse: sys.vectors_inv,
                });
            }
        }
        Err(Error::NumericalFailure(format!(
            "matrices are not simultaneously diagonalizable: off-diagonal defect {last_err:.3e} exceeds {JOINT_DIAG_TOL:.1e}"
        )))
    }

    pub fn a_values(&self) -> &[Complex64] {
        &self.a_values
    }

    pub fn b_values(&self) -> &[Complex64] {
        &self.b_values
    }

    pub fn cond(&self) -> f64 {
        self.cond
    }

    /// V diag(f(a_i, b_i)) V^{-1} over paired joint eigenvalues.
    pub fn apply2<F>(&self, f: F) -> Result<ComplexMatrix>
    where
        F: Fn(Complex64, Complex64) -> Option<Complex64>,
    {
        let p = self.a_values.len();
        let mut d = DMatrix::<Complex64>::zeros(p, p);
        for i in 0..p {
            let (ai, bi) = (self.a_values[i], self.b_values[i]);
            d[(i, i)] = f(ai, bi).ok_or_else(|| {
                Error::Domain(format!(
                    "joint eigenvalue pair ({ai}, {bi}) outside the function domain"
                ))
            })?;
        }
        Ok(ComplexMatrix::from_inner(
            &self.transform.inner * d * &self.inverse.inner,
        ))
    }
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

    #[test]
    fn construction_rejects_bad_input() {
        assert!(ComplexMatrix::new(2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::new(0, vec![]).is_err());
        assert!(ComplexMatrix::new(1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(1, vec![c(f64::INFINITY, 0.0)]).is_err());
    }

    #[test]
    fn spectrum_identity() {
        let vals = spectrum(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(vals.len(), 2);
        for v in vals {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn spectrum_diagonal() {
        let m = ComplexMatrix::from_diagonal(&[c(2.5, 0.0), c(-0.5, 0.0)]);
        let vals = spectrum(&m).unwrap();
        assert!((vals[0] - c(-0.5, 0.0)).norm() < 1e-12);
        assert!((vals[1] - c(2.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn spectrum_upper_triangular() {
        // characteristic polynomial (2-λ)(3-λ)
        let m = ComplexMatrix::from_real_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
        let vals = spectrum(&m).unwrap();
        assert!((vals[0] - c(2.0, 0.0)).norm() < 1e-10);
        assert!((vals[1] - c(3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn spectrum_is_deterministic() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 2.0), c(0.3, -0.4)],
            vec![c(-0.2, 0.1), c(3.0, -1.0)],
        ])
        .unwrap();
        let a = spectrum(&m).unwrap();
        let b = spectrum(&m).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn apply_exp_identity() {
        let out = apply_scalar_function(&ComplexMatrix::identity(2), |z| Some(z.exp())).unwrap();
        let expect = ComplexMatrix::scalar(2, c(std::f64::consts::E, 0.0));
        assert!(close(&out, &expect, 1e-14));
    }

    #[test]
    fn apply_square_diagonal() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let out = apply_scalar_function(&m, |z| Some(z * z)).unwrap();
        let expect = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(4.0, 0.0)]);
        assert!(close(&out, &expect, 1e-14));
    }

    #[test]
    fn apply_reciprocal_matches_inverse() {
        let m = ComplexMatrix::from_real_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
        let out = apply_scalar_function(&m, |z| Some(z.inv())).unwrap();
        let inv = m.try_inverse().unwrap();
        assert!(close(&out, &inv, 1e-12));
    }

    #[test]
    fn functional_calculus_homomorphism() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.5), c(0.7, 0.0)],
            vec![c(0.1, -0.3), c(4.0, 0.0)],
        ])
        .unwrap();
        let fg = apply_scalar_function(&m, |z| Some(z.exp() * z.sin())).unwrap();
        let f = apply_scalar_function(&m, |z| Some(z.exp())).unwrap();
        let g = apply_scalar_function(&m, |z| Some(z.sin())).unwrap();
        assert!(close(&fg, &(&f * &g), 1e-9));
    }

    #[test]
    fn commute_defect_identity_is_zero() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(2.0, 0.0)],
            vec![c(0.0, -1.0), c(3.0, 0.0)],
        ])
        .unwrap();
        assert!(commute_defect(&ComplexMatrix::identity(2), &m).unwrap() < 1e-15);
    }

    #[test]
    fn commute_defect_diagonals_zero() {
        let a = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let b = ComplexMatrix::from_diagonal(&[c(3.0, 0.0), c(4.0, 0.0)]);
        assert!(commute_defect(&a, &b).unwrap() < 1e-15);
    }

    #[test]
    fn commute_defect_nilpotent_pair_positive() {
        // AB - BA = diag(1, -1)
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let d = commute_defect(&a, &b).unwrap();
        assert!((d - 2.0_f64.sqrt()).abs() < 1e-14);
        // symmetry
        assert!((commute_defect(&b, &a).unwrap() - d).abs() < 1e-15);
    }

    #[test]
    fn commute_defect_shape_error() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(commute_defect(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn positive_stable_cases() {
        assert!(is_positive_stable(&ComplexMatrix::identity(2)).unwrap());
        let m = ComplexMatrix::from_diagonal(&[c(-1.0, 0.0), c(2.0, 0.0)]);
        assert!(!is_positive_stable(&m).unwrap());
        let m = ComplexMatrix::from_diagonal(&[c(0.3, 0.0), c(5.0, 2.0)]);
        assert!(is_positive_stable(&m).unwrap());
    }

    #[test]
    fn defective_matrix_rejected() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(Eigensystem::new(&m).is_err());
    }

    #[test]
    fn eigensystem_nonnormal_reconstructs() {
        // V diag(1+i, 3-2i) V^{-1} for a non-orthogonal V
        let v = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.75, 0.0)],
            vec![c(-0.5, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let d = ComplexMatrix::from_diagonal(&[c(1.0, 1.0), c(3.0, -2.0)]);
        let m = &(&v * &d) * &v.try_inverse().unwrap();
        let sys = Eigensystem::new(&m).unwrap();
        assert!(sys.cond() >= 1.0);
        let rebuilt = sys.apply(Some).unwrap();
        assert!(close(&rebuilt, &m, 1e-12));
        assert!((sys.values()[0] - c(1.0, 1.0)).norm() < 1e-10);
        assert!((sys.values()[1] - c(3.0, -2.0)).norm() < 1e-10);
    }

    #[test]
    fn joint_eigensystem_commuting_pair() {
        let v = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.75, 0.0)],
            vec![c(-0.5, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let vi = v.try_inverse().unwrap();
        let a = &(&v * &ComplexMatrix::from_diagonal(&[c(16.5, 0.0), c(18.0, 0.0)])) * &vi;
        let b = &(&v * &ComplexMatrix::from_diagonal(&[c(3.5, 0.0), c(2.75, 0.0)])) * &vi;
        let joint = JointEigensystem::new(&a, &b).unwrap();
        let ra = joint.apply2(|x, _| Some(x)).unwrap();
        let rb = joint.apply2(|_, y| Some(y)).unwrap();
        assert!(close(&ra, &a, 1e-10));
        assert!(close(&rb, &b, 1e-10));
    }

    #[test]
    fn joint_eigensystem_rejects_noncommuting() {
        let a = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 2.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert!(JointEigensystem::new(&a, &b).is_err());
    }

    #[test]
    fn domain_error_propagates() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(-2.0, 0.0)]);
        let r = apply_scalar_function(&m, |z| if z.re > 0.0 { Some(z) } else { None });
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
