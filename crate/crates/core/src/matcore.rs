//! Dense complex Hermitian linear algebra.
//!
//! Everything downstream works on [`HermitianMatrix`] values and the [`Spectrum`]
//! produced by a cyclic Jacobi eigensolver. Spectral functions (square root,
//! support-restricted logarithm, exponential, powers) are evaluated by mapping
//! eigenvalues and rebuilding `V f(Λ) V†`.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, the storage type behind every operator.
pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues in `(-TOL_PSD, 0)` are treated as numerical zeros.
pub const TOL_PSD: f64 = 1e-10;

/// Default support floor: eigenvalues at or below it are outside the support.
pub const DEFAULT_FLOOR: f64 = 1e-12;

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Jacobi stops once the off-diagonal Frobenius norm drops below this fraction of `‖A‖_F`.
pub const JACOBI_REL_THRESHOLD: f64 = 1e-13;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A square complex matrix known to be Hermitian within `1e-12·max(1, max|entry|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Wraps `m` after checking squareness and the Hermitian tolerance.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let defect = hermiticity_defect(&m);
        let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        if defect > 1e-12 * scale {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self(m))
    }

    /// Projects `m` onto its Hermitian part `(m + m†)/2`.
    ///
    /// Used for products such as `B X B†` that are Hermitian in exact arithmetic.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        assert!(m.is_square(), "hermitian_part needs a square matrix");
        Self((m + m.adjoint()).scale(0.5))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// Real part of the trace (the imaginary part vanishes for Hermitian input).
    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(&self.0)
    }

    pub fn eig(&self) -> Result<Spectrum> {
        hermitian_eig(self)
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

/// Eigendecomposition `A = V diag(λ) V†` with eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Rebuilds `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.rebuild(&values)
    }

    pub fn try_map(&self, f: impl Fn(f64) -> Result<f64>) -> Result<HermitianMatrix> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&l| f(l))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.rebuild(&values))
    }

    pub fn apply(&self, func: SpectralFn, floor: f64) -> Result<HermitianMatrix> {
        self.try_map(|l| func.eval(l, floor))
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.rebuild(&self.eigenvalues)
    }

    fn rebuild(&self, values: &[f64]) -> HermitianMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(lambda);
        }
        HermitianMatrix::hermitian_part(&(scaled * v.adjoint()))
    }
}

/// Spectral functions supported by [`matrix_fn`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFn {
    Sqrt,
    /// `ln λ` on eigenvalues above the floor, 0 elsewhere.
    LogOnSupport,
    Exp,
    /// `λ^p`; negative `p` requires every eigenvalue above the floor.
    Power(f64),
    /// `λ^p` on eigenvalues above the floor, 0 elsewhere (pseudo-inverse powers).
    PowerOnSupport(f64),
}

impl SpectralFn {
    fn name(self) -> &'static str {
        match self {
            SpectralFn::Sqrt => "sqrt",
            SpectralFn::LogOnSupport => "log_on_support",
            SpectralFn::Exp => "exp",
            SpectralFn::Power(_) => "power",
            SpectralFn::PowerOnSupport(_) => "power_on_support",
        }
    }

    pub fn eval(self, lambda: f64, floor: f64) -> Result<f64> {
        let undefined = || Error::UndefinedSpectralFunction {
            function: self.name(),
            eigenvalue: lambda,
        };
        if !matches!(self, SpectralFn::Exp) && lambda < -TOL_PSD {
            return Err(undefined());
        }
        let clamped = lambda.max(0.0);
        Ok(match self {
            SpectralFn::Exp => lambda.exp(),
            SpectralFn::Sqrt => clamped.sqrt(),
            SpectralFn::LogOnSupport => {
                if lambda > floor {
                    lambda.ln()
                } else {
                    0.0
                }
            }
            SpectralFn::Power(p) if p < 0.0 => {
                if lambda <= floor {
                    return Err(undefined());
                }
                lambda.powf(p)
            }
            SpectralFn::Power(p) => clamped.powf(p),
            SpectralFn::PowerOnSupport(p) => {
                if lambda > floor {
                    lambda.powf(p)
                } else {
                    0.0
                }
            }
        })
    }
}

/// Largest `|A_ij - conj(A_ji)|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Each rotation first removes the phase of `a_pq` and then applies the real
/// two-sided Jacobi rotation, so the update is `A ← J† A J`, `V ← V J` with
/// `J = diag(1, e^{-iφ}) R(θ)` on the `(p, q)` plane.
pub fn hermitian_eig(a: &HermitianMatrix) -> Result<Spectrum> {
    let n = a.dim();
    let mut work = HermitianMatrix::hermitian_part(a.as_matrix()).into_inner();
    let mut vecs = CMatrix::identity(n, n);
    let threshold = JACOBI_REL_THRESHOLD * frobenius_norm(&work);

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&work);
    while off > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut work, &mut vecs, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&work);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work[(i, i)].re.total_cmp(&work[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| work[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
    let negligible = app.abs() + 100.0 * g == app.abs() && aqq.abs() + 100.0 * g == aqq.abs();
    if g < f64::MIN_POSITIVE || negligible {
        // apq / |apq| is not unit modulus for subnormal apq
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = Complex64::from_polar(1.0, apq.arg());
    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * g);
    let t = if tau.abs() > 1e150 {
        0.5 / tau
    } else {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = a.nrows();
    // A ← A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    // A ← J† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    // V ← V J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Applies `func` spectrally; eigenvalues at or below `floor` follow the support convention.
pub fn matrix_fn(a: &HermitianMatrix, func: SpectralFn, floor: f64) -> Result<HermitianMatrix> {
    a.eig()?.apply(func, floor)
}

/// `Tr|A|`, the sum of absolute eigenvalues.
pub fn trace_norm(a: &HermitianMatrix) -> Result<f64> {
    Ok(a.eig()?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Closed form of `∫₀^∞ (t+a)⁻¹ (t+b)⁻¹ dt`, i.e. `ln(a/b)/(a−b)`.
///
/// Evaluated as `ln1p((hi−lo)/lo)/(hi−lo)` so the result is exactly symmetric
/// and accurate when `a ≈ b`. Within `1e-12·max(a,b)` the removable singularity
/// is replaced by its limit, evaluated at the midpoint `2/(a+b)`.
pub fn resolvent_integral_kernel(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "resolvent kernel needs positive finite arguments, got ({a}, {b})"
        )));
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let gap = hi - lo;
    if gap <= 1e-12 * hi {
        return Ok(2.0 / (hi + lo));
    }
    Ok((gap / lo).ln_1p() / gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn identity(n: usize) -> CMatrix {
        CMatrix::identity(n, n)
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = SplitMix64::new(seed);
        let g = CMatrix::from_fn(n, n, |_, _| rng.complex_gaussian());
        HermitianMatrix::hermitian_part(&g)
    }

    fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn unitarity_defect(v: &CMatrix) -> f64 {
        max_abs_diff(&(v.adjoint() * v), &identity(v.nrows()))
    }

    #[test]
    fn subnormal_off_diagonal_keeps_vectors_orthonormal() {
        // the large (0, 2) coupling forces a sweep that also visits the subnormal (0, 1)
        let tiny = Complex64::new(1e-320, 1e-320);
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(1.0), tiny, c(0.5), tiny.conj(), c(1.0), c(0.0), c(0.5), c(0.0), c(3.0)],
        );
        let s = hermitian_eig(&HermitianMatrix::new(m).unwrap()).unwrap();
        assert!(unitarity_defect(&s.eigenvectors) < 1e-14);
    }

    #[test]
    fn block_diagonal_kronecker_spectrum() {
        // direct sums of Kronecker products leave exact zeros that rotations smear
        let blocks: Vec<CMatrix> = (0..4)
            .map(|k| {
                let a = random_hermitian(2 + k % 2, 40 + k as u64).into_inner();
                let b = random_hermitian(3, 50 + k as u64).into_inner();
                a.kronecker(&b)
            })
            .collect();
        let n: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut m = CMatrix::zeros(n, n);
        let mut at = 0;
        for b in &blocks {
            m.view_mut((at, at), b.shape()).copy_from(b);
            at += b.nrows();
        }
        let h = HermitianMatrix::new(m.clone()).unwrap();
        let s = hermitian_eig(&h).unwrap();
        assert!(unitarity_defect(&s.eigenvectors) < 1e-12);
        assert!(max_abs_diff(s.reconstruct().as_matrix(), &m) < 1e-12);
    }

    #[test]
    fn identity_spectrum() {
        let s = hermitian_eig(&HermitianMatrix::identity(2)).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_spectrum_is_standard_basis() {
        let s = hermitian_eig(&HermitianMatrix::from_real_diagonal(&[0.75, 0.25])).unwrap();
        assert_eq!(s.eigenvalues, vec![0.25, 0.75]);
        assert_eq!(s.eigenvectors[(1, 0)].norm(), 1.0);
        assert_eq!(s.eigenvectors[(0, 1)].norm(), 1.0);
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        for seed in 0..5 {
            let a = random_hermitian(8, seed);
            let s = a.eig().unwrap();
            let scale = s.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
            let tol = 1e-10 * 8.0 * scale;
            assert!(max_abs_diff(s.reconstruct().as_matrix(), a.as_matrix()) <= tol);
            let vv = s.eigenvectors.adjoint() * &s.eigenvectors;
            assert!(max_abs_diff(&vv, &identity(8)) <= tol);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(2.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                c(2.0),
            ],
        );
        let s = HermitianMatrix::new(m).unwrap().eig().unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(Error::NotHermitian { .. })
        ));
        let r = CMatrix::zeros(2, 3);
        assert!(matches!(
            HermitianMatrix::new(r),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn sqrt_of_diagonal() {
        let a = HermitianMatrix::from_real_diagonal(&[4.0, 9.0]);
        let r = matrix_fn(&a, SpectralFn::Sqrt, DEFAULT_FLOOR).unwrap();
        assert!(max_abs_diff(
            r.as_matrix(),
            HermitianMatrix::from_real_diagonal(&[2.0, 3.0]).as_matrix()
        ) < 1e-15);
    }

    #[test]
    fn log_of_maximally_mixed() {
        let d = 5;
        let a = HermitianMatrix::identity(d).scale(1.0 / d as f64);
        let r = matrix_fn(&a, SpectralFn::LogOnSupport, DEFAULT_FLOOR).unwrap();
        let expected = HermitianMatrix::identity(d).scale(-(d as f64).ln());
        assert!(max_abs_diff(r.as_matrix(), expected.as_matrix()) < 1e-14);
    }

    #[test]
    fn log_support_convention_and_singular_inverse() {
        let a = HermitianMatrix::from_real_diagonal(&[0.0, 0.5, 0.5]);
        let l = matrix_fn(&a, SpectralFn::LogOnSupport, DEFAULT_FLOOR).unwrap();
        assert_eq!(l.as_matrix()[(0, 0)], c(0.0));
        assert!(matches!(
            matrix_fn(&a, SpectralFn::Power(-1.0), DEFAULT_FLOOR),
            Err(Error::UndefinedSpectralFunction { .. })
        ));
        let pinv = matrix_fn(&a, SpectralFn::PowerOnSupport(-1.0), DEFAULT_FLOOR).unwrap();
        assert!((pinv.as_matrix()[(1, 1)].re - 2.0).abs() < 1e-14);
        assert_eq!(pinv.as_matrix()[(0, 0)], c(0.0));
    }

    #[test]
    fn sqrt_clamps_drift_but_rejects_negative() {
        let drift = HermitianMatrix::from_real_diagonal(&[-1e-12, 1.0]);
        assert!(matrix_fn(&drift, SpectralFn::Sqrt, DEFAULT_FLOOR).is_ok());
        let neg = HermitianMatrix::from_real_diagonal(&[-1e-3, 1.0]);
        assert!(matrix_fn(&neg, SpectralFn::Sqrt, DEFAULT_FLOOR).is_err());
    }

    #[test]
    fn exp_log_round_trip() {
        let mut rng = SplitMix64::new(11);
        let g = CMatrix::from_fn(5, 5, |_, _| rng.complex_gaussian());
        let rho = HermitianMatrix::hermitian_part(&(&g * g.adjoint()));
        let rho = rho.scale(1.0 / rho.trace());
        let log = matrix_fn(&rho, SpectralFn::LogOnSupport, DEFAULT_FLOOR).unwrap();
        let back = matrix_fn(&log, SpectralFn::Exp, DEFAULT_FLOOR).unwrap();
        let scale = rho.eig().unwrap().max();
        assert!(max_abs_diff(back.as_matrix(), rho.as_matrix()) <= 1e-10 * 5.0 * scale);
    }

    #[test]
    fn spectral_function_commutes_with_input() {
        let a = random_hermitian(6, 3);
        let e = matrix_fn(&a, SpectralFn::Exp, DEFAULT_FLOOR).unwrap();
        let lhs = a.as_matrix() * e.as_matrix();
        let rhs = e.as_matrix() * a.as_matrix();
        let scale = frobenius_norm(&lhs).max(1.0);
        assert!(max_abs_diff(&lhs, &rhs) <= 1e-10 * 6.0 * scale);
    }

    #[test]
    fn trace_norm_cases() {
        assert_eq!(trace_norm(&HermitianMatrix::zeros(3)).unwrap(), 0.0);
        let a = HermitianMatrix::from_real_diagonal(&[0.5, -0.5]);
        assert_eq!(trace_norm(&a).unwrap(), 1.0);
    }

    #[test]
    fn kernel_closed_values() {
        assert_eq!(resolvent_integral_kernel(2.0, 2.0).unwrap(), 0.5);
        let e = std::f64::consts::E;
        let k = resolvent_integral_kernel(e, 1.0).unwrap();
        assert!((k - 1.0 / (e - 1.0)).abs() < 1e-15);
        assert!(resolvent_integral_kernel(0.0, 1.0).is_err());
        assert!(resolvent_integral_kernel(1.0, -2.0).is_err());
    }

    /// Adaptive Simpson on `t = u/(1-u)`, an independent route to the kernel.
    fn kernel_by_quadrature(a: f64, b: f64) -> f64 {
        fn f(u: f64, a: f64, b: f64) -> f64 {
            if u >= 1.0 {
                return 0.0;
            }
            let t = u / (1.0 - u);
            let jac = 1.0 / ((1.0 - u) * (1.0 - u));
            jac / ((t + a) * (t + b))
        }
        fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
            h / 6.0 * (fa + 4.0 * fm + fb)
        }
        #[allow(clippy::too_many_arguments)]
        fn rec(l: f64, r: f64, fl: f64, fm: f64, fr: f64, whole: f64, eps: f64, depth: u32, a: f64, b: f64) -> f64 {
            let m = 0.5 * (l + r);
            let lm = 0.5 * (l + m);
            let rm = 0.5 * (m + r);
            let flm = f(lm, a, b);
            let frm = f(rm, a, b);
            let left = simpson(fl, flm, fm, m - l);
            let right = simpson(fm, frm, fr, r - m);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(l, m, fl, flm, fm, left, eps / 2.0, depth - 1, a, b)
                + rec(m, r, fm, frm, fr, right, eps / 2.0, depth - 1, a, b)
        }
        let (fl, fm, fr) = (f(0.0, a, b), f(0.5, a, b), f(1.0, a, b));
        rec(0.0, 1.0, fl, fm, fr, simpson(fl, fm, fr, 1.0), 1e-13, 50, a, b)
    }

    #[test]
    fn kernel_matches_quadrature() {
        for &b in &[0.05, 0.3, 1.0, 1.0 + 1e-9, 2.5, 17.0] {
            let q = kernel_by_quadrature(1.0, b);
            let k = resolvent_integral_kernel(1.0, b).unwrap();
            assert!((q - k).abs() < 1e-8, "b={b}: quad {q} vs closed {k}");
        }
    }

    #[test]
    fn kernel_symmetric() {
        for &(a, b) in &[(0.1, 0.7), (3.0, 3.0 + 1e-13), (1e-6, 4.0), (2.0, 2.000001)] {
            let ab = resolvent_integral_kernel(a, b).unwrap();
            let ba = resolvent_integral_kernel(b, a).unwrap();
            assert!((ab - ba).abs() <= 1e-14 * ab);
        }
    }
}
