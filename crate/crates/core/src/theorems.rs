//! Certificate evaluators.
//!
//! Each evaluator computes both sides of one inequality family on concrete
//! states and records the signed slack of every comparison, plus residuals of
//! the exact identities and equality conditions involved.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{
    mutual_information, product_of_marginals, relative_entropy, root_overlap, sqrt_distance_sq,
    total_correlation, trace_distance, ExtendedScalar,
};
use crate::matcore::{
    resolvent_integral_kernel, trace_of_product, CMatrix, HermitianMatrix, SpectralFn,
    DEFAULT_FLOOR,
};
use crate::serde_ext::{serialize_f64, serialize_opt_f64};
use crate::states::{apply_channel, marginal, validate_density, DensityMatrix, KrausChannel, TOL_TRACE};
use crate::tensor::{lift, lift_matrix, TensorShape};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Allowed drift of the closed-form resolvent integral from 1.
pub const GT3_IDENTITY_LIMIT: f64 = 1e-8;

/// `Tr e^{−H}` further than this from 1 triggers internal normalization of `H`.
pub const PARTITION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One inequality `lower ≤ upper`; `slack = upper − lower`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub label: String,
    #[serde(serialize_with = "serialize_f64")]
    pub lower: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub upper: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub slack: f64,
}

/// A nonnegative defect. With a `limit` it is an identity the certificate
/// enforces; without one it is a diagnostic (e.g. an equality-condition defect
/// on inputs that need not satisfy it).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub label: String,
    #[serde(serialize_with = "serialize_f64")]
    pub value: f64,
    #[serde(serialize_with = "serialize_opt_f64")]
    pub limit: Option<f64>,
}

impl Residual {
    pub fn within_limit(&self) -> bool {
        self.limit.is_none_or(|l| self.value <= l)
    }
}

/// Both sides of one theorem instance with slacks, residuals and a verdict.
///
/// The verdict is `pass` iff every slack is `≥ −tolerance` and every enforced
/// residual is within its limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub lhs: ExtendedScalar,
    pub bounds: Vec<Bound>,
    pub residuals: Vec<Residual>,
    pub notes: Vec<String>,
    #[serde(serialize_with = "serialize_f64")]
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl Certificate {
    fn new(name: &str, lhs: ExtendedScalar, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            bounds: Vec::new(),
            residuals: Vec::new(),
            notes: Vec::new(),
            tolerance,
            verdict: Verdict::Pass,
        }
    }

    /// Records `lower ≤ upper`.
    fn compare(&mut self, label: &str, lower: f64, upper: f64) {
        // x ≤ +∞ holds for every x, including +∞ itself
        let slack = if upper == f64::INFINITY {
            f64::INFINITY
        } else {
            upper - lower
        };
        self.bounds.push(Bound {
            label: label.to_string(),
            lower,
            upper,
            slack,
        });
    }

    /// Records `lhs ≥ value`.
    fn lower_bound(&mut self, label: &str, value: f64) {
        self.compare(label, value, self.lhs.to_f64());
    }

    /// Records `lhs ≤ value`.
    fn upper_bound(&mut self, label: &str, value: f64) {
        self.compare(label, self.lhs.to_f64(), value);
    }

    fn residual(&mut self, label: &str, value: f64, limit: Option<f64>) {
        self.residuals.push(Residual {
            label: label.to_string(),
            value,
            limit,
        });
    }

    fn finish(mut self) -> Self {
        let slacks_ok = self.bounds.iter().all(|b| b.slack >= -self.tolerance);
        let residuals_ok = self.residuals.iter().all(Residual::within_limit);
        self.verdict = if slacks_ok && residuals_ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }

    /// Tightens a diagnostic residual into an enforced one and re-evaluates.
    pub fn enforce_residual(mut self, label: &str, limit: f64) -> Self {
        if let Some(r) = self.residuals.iter_mut().find(|r| r.label == label) {
            r.limit = Some(limit);
        }
        self.finish()
    }

    /// Adds an enforced residual and re-evaluates.
    pub fn with_residual(mut self, label: &str, value: f64, limit: f64) -> Self {
        self.residual(label, value, Some(limit));
        self.finish()
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn bound(&self, label: &str) -> Option<&Bound> {
        self.bounds.iter().find(|b| b.label == label)
    }

    pub fn residual_value(&self, label: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.label == label).map(|r| r.value)
    }

    /// Smallest slack, `+∞` when there are no bounds.
    pub fn min_slack(&self) -> f64 {
        self.bounds.iter().map(|b| b.slack).fold(f64::INFINITY, f64::min)
    }

    /// Largest enforced residual, 0 when there are none.
    pub fn max_enforced_residual(&self) -> f64 {
        self.residuals
            .iter()
            .filter(|r| r.limit.is_some())
            .map(|r| r.value)
            .fold(0.0, f64::max)
    }
}

fn require_full_rank(rho: &DensityMatrix, which: &'static str) -> Result<()> {
    let min = rho.min_eigenvalue();
    if min <= DEFAULT_FLOOR {
        return Err(Error::RankDeficient {
            which,
            min_eigenvalue: min,
        });
    }
    Ok(())
}

fn require_dim(rho: &DensityMatrix, expected: usize) -> Result<()> {
    if rho.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// Shared body of the bipartite and multipartite correlation certificates.
fn correlation_certificate(
    name: &str,
    rho: &DensityMatrix,
    shape: &TensorShape,
    lhs: f64,
    with_pinsker: bool,
    tolerance: f64,
) -> Result<Certificate> {
    let product = product_of_marginals(rho, shape)?;
    let hs = sqrt_distance_sq(rho, &product)?;
    let argument = 1.0 - 0.5 * hs;
    if argument <= 0.0 {
        return Err(Error::DegenerateOverlap { argument });
    }
    let renyi = -2.0 * argument.ln();

    let mut cert = Certificate::new(name, ExtendedScalar::Finite(lhs), tolerance);
    cert.lower_bound("renyi", renyi);
    if with_pinsker {
        let td = trace_distance(rho, &product)?;
        cert.lower_bound("pinsker", 0.5 * td * td);
        cert.lower_bound("hs", hs);
        cert.compare("hs_le_renyi", hs, renyi);
    }
    let overlap = root_overlap(rho, &product)?;
    cert.residual("overlap_identity", (overlap - argument).abs(), Some(tolerance));
    Ok(cert.finish())
}

/// Mutual information against the root-overlap, Pinsker and Hilbert–Schmidt
/// lower bounds, plus the chain `renyi ≥ hs`.
pub fn subadditivity_certificate(
    rho12: &DensityMatrix,
    shape: &TensorShape,
    tolerance: f64,
) -> Result<Certificate> {
    shape.require_bipartite()?;
    let lhs = mutual_information(rho12, shape)?;
    correlation_certificate("subadditivity", rho12, shape, lhs, true, tolerance)
}

/// Total correlation against `−2 ln(1 − ½ Tr[(√ρ − √(ρ₁⊗…⊗ρ_N))²])`.
pub fn multipartite_certificate(
    rho: &DensityMatrix,
    shape: &TensorShape,
    tolerance: f64,
) -> Result<Certificate> {
    let lhs = total_correlation(rho, shape)?;
    correlation_certificate("multipartite", rho, shape, lhs, false, tolerance)
}

/// `D(ρ‖σ)` against Pinsker and the root-overlap bound.
pub fn divergence_bounds_certificate(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tolerance: f64,
) -> Result<Certificate> {
    let lhs = relative_entropy(rho, sigma)?;
    let td = trace_distance(rho, sigma)?;
    let overlap = root_overlap(rho, sigma)?;
    let mut cert = Certificate::new("divergence_bounds", lhs, tolerance);
    if !lhs.is_finite() {
        cert.notes.push("infinite lhs: support of rho not contained in support of sigma".into());
    }
    cert.lower_bound("pinsker", 0.5 * td * td);
    let renyi_half = if overlap > 0.0 {
        -2.0 * overlap.ln()
    } else {
        f64::INFINITY
    };
    cert.lower_bound("renyi_half", renyi_half);
    let identity = 1.0 - 0.5 * sqrt_distance_sq(rho, sigma)?;
    cert.residual("overlap_identity", (overlap - identity).abs(), Some(tolerance));
    Ok(cert.finish())
}

/// Frobenius norm of `(ln ρ₁₂ − ln σ₁₂) − (ln ρ₁ − ln σ₁) ⊗ I`, support-restricted logs.
pub fn log_ratio_residual(
    rho12: &DensityMatrix,
    sigma12: &DensityMatrix,
    shape: &TensorShape,
) -> Result<f64> {
    shape.require_bipartite()?;
    shape.check_dim(rho12.dim())?;
    require_dim(sigma12, rho12.dim())?;
    let rho1 = marginal(rho12, shape, &[0])?;
    let sigma1 = marginal(sigma12, shape, &[0])?;
    log_ratio_defect(rho12, sigma12, &rho1, &sigma1, shape)
}

fn log_ratio_defect(
    rho12: &DensityMatrix,
    sigma12: &DensityMatrix,
    rho1: &DensityMatrix,
    sigma1: &DensityMatrix,
    shape: &TensorShape,
) -> Result<f64> {
    let joint = &rho12.log() - &sigma12.log();
    let local = lift(&(&rho1.log() - &sigma1.log()), shape, 0)?;
    Ok((&joint - &local).frobenius_norm())
}

/// Monotonicity gap `D(ρ₁₂‖σ₁₂) − D(ρ₁‖σ₁)` against
/// `Tr[(√ρ₁₂ − exp{½ ln σ₁₂ − ½ ln σ₁ + ½ ln ρ₁})²]`.
///
/// `σ₁₂`, `σ₁` and `ρ₁` must be full rank. The log-ratio equality-condition
/// defect is recorded as a diagnostic residual.
pub fn monotonicity_certificate(
    rho12: &DensityMatrix,
    sigma12: &DensityMatrix,
    shape: &TensorShape,
    tolerance: f64,
) -> Result<Certificate> {
    shape.require_bipartite()?;
    shape.check_dim(rho12.dim())?;
    require_dim(sigma12, rho12.dim())?;
    let rho1 = marginal(rho12, shape, &[0])?;
    let sigma1 = marginal(sigma12, shape, &[0])?;
    require_full_rank(sigma12, "sigma12")?;
    require_full_rank(&sigma1, "sigma1")?;
    require_full_rank(&rho1, "rho1")?;

    let joint = relative_entropy(rho12, sigma12)?;
    let local = relative_entropy(&rho1, &sigma1)?;
    let (Some(joint), Some(local)) = (joint.finite(), local.finite()) else {
        return Err(Error::SupportViolation {
            what: "rho12",
            weight: f64::NAN,
        });
    };
    let gap = joint - local;

    let exponent = &(&sigma12.log() - &lift(&sigma1.log(), shape, 0)?) + &lift(&rho1.log(), shape, 0)?;
    let half_exp = exponent.scale(0.5).eig()?.apply(SpectralFn::Exp, DEFAULT_FLOOR)?;
    let remainder = (&rho12.sqrt() - &half_exp).frobenius_norm().powi(2);

    let mut cert = Certificate::new("monotonicity", ExtendedScalar::Finite(gap), tolerance);
    cert.lower_bound("remainder", remainder);
    let log_residual = log_ratio_defect(rho12, sigma12, &rho1, &sigma1, shape)?;
    cert.residual("log_ratio", log_residual, None);
    Ok(cert.finish())
}

/// The Petz map `τ₁ ↦ ρ₁₂^{1/2} (ρ₁^{−1/2} τ₁ ρ₁^{−1/2} ⊗ I) ρ₁₂^{1/2}`.
pub fn petz_recovery(
    rho12: &DensityMatrix,
    shape: &TensorShape,
    tau1: &DensityMatrix,
) -> Result<DensityMatrix> {
    petz_recovery_matrix(rho12, shape, tau1).and_then(validate_density)
}

fn petz_recovery_matrix(
    rho12: &DensityMatrix,
    shape: &TensorShape,
    tau1: &DensityMatrix,
) -> Result<HermitianMatrix> {
    let (d1, _) = shape.require_bipartite()?;
    shape.check_dim(rho12.dim())?;
    require_dim(tau1, d1)?;
    let rho1 = marginal(rho12, shape, &[0])?;

    // Weight of τ₁ on the kernel of ρ₁.
    let spec = rho1.spectrum();
    let v = &spec.eigenvectors;
    let rotated = v.adjoint() * tau1.matrix().as_matrix() * v;
    let outside: f64 = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l <= DEFAULT_FLOOR)
        .map(|(k, _)| rotated[(k, k)].re)
        .sum();
    if outside > TOL_TRACE {
        return Err(Error::SupportViolation {
            what: "tau1",
            weight: outside,
        });
    }

    let inv_sqrt = rho1.apply(SpectralFn::PowerOnSupport(-0.5))?;
    let inner = inv_sqrt.as_matrix() * tau1.matrix().as_matrix() * inv_sqrt.as_matrix();
    let inner = lift_matrix(&inner, shape, 0)?;
    let root = rho12.sqrt();
    Ok(HermitianMatrix::hermitian_part(
        &(root.as_matrix() * inner * root.as_matrix()),
    ))
}

/// `Tr[(T_ρ(σ₁) − σ₁₂)²]`, zero exactly when the Petz recovery condition holds.
pub fn petz_residual(
    rho12: &DensityMatrix,
    sigma12: &DensityMatrix,
    shape: &TensorShape,
) -> Result<f64> {
    let sigma1 = marginal(sigma12, shape, &[0])?;
    let recovered = petz_recovery_matrix(rho12, shape, &sigma1)?;
    require_dim(sigma12, recovered.dim())?;
    Ok((&recovered - sigma12.matrix()).frobenius_norm().powi(2))
}

/// `Tr exp{ln σ₁₂ − ln σ₁ + ln ρ₁}` against `Tr ∫₀^∞ σ₁₂ (t+σ₁)⁻¹ ρ₁ (t+σ₁)⁻¹ dt`.
///
/// The integral is evaluated in closed form in the eigenbasis of `σ₁`: with
/// `σ₁ = Σ s_k |k⟩⟨k|`, the integrand's `(k, l)` entry integrates to
/// `⟨k|ρ₁|l⟩·K(s_k, s_l)` where `K` is [`resolvent_integral_kernel`]. When
/// `σ₁ = Tr₂ σ₁₂` the integral equals `Tr ρ₁ = 1`, which is enforced.
pub fn gt3_certificate(
    rho1: &DensityMatrix,
    sigma1: &DensityMatrix,
    sigma12: &DensityMatrix,
    shape: &TensorShape,
    tolerance: f64,
) -> Result<Certificate> {
    let (d1, _) = shape.require_bipartite()?;
    shape.check_dim(sigma12.dim())?;
    require_dim(rho1, d1)?;
    require_dim(sigma1, d1)?;
    require_full_rank(sigma12, "sigma12")?;
    require_full_rank(sigma1, "sigma1")?;
    require_full_rank(rho1, "rho1")?;

    let exponent = &(&sigma12.log() - &lift(&sigma1.log(), shape, 0)?) + &lift(&rho1.log(), shape, 0)?;
    let lhs: f64 = exponent.eig()?.eigenvalues.iter().map(|l| l.exp()).sum();

    let spec = sigma1.spectrum();
    let w = &spec.eigenvectors;
    let mut kernel_weighted = w.adjoint() * rho1.matrix().as_matrix() * w;
    for k in 0..d1 {
        for l in 0..d1 {
            let kern = resolvent_integral_kernel(spec.eigenvalues[k], spec.eigenvalues[l])?;
            kernel_weighted[(k, l)] *= kern;
        }
    }
    let integrand: CMatrix = w * kernel_weighted * w.adjoint();
    let lifted = lift_matrix(&integrand, shape, 0)?;
    let integral = trace_of_product(sigma12.matrix().as_matrix(), &lifted).re;

    let mut cert = Certificate::new("gt3", ExtendedScalar::Finite(lhs), tolerance);
    cert.upper_bound("integral", integral);
    cert.residual(
        "integral_identity",
        (integral - 1.0).abs(),
        Some(GT3_IDENTITY_LIMIT),
    );
    Ok(cert.finish())
}

/// Peierls–Bogoliubov `Tr e^{−H+A} ≥ exp(Tr A e^{−H})` and Golden–Thompson
/// `Tr e^{−H+A} ≤ Tr e^{−H} e^{A}`.
///
/// `H` is shifted by `ln Tr e^{−H}` when that trace is not 1; the shift is noted.
pub fn proofstep_certificate(
    h: &HermitianMatrix,
    a: &HermitianMatrix,
    tolerance: f64,
) -> Result<Certificate> {
    if h.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: a.dim(),
        });
    }
    let n = h.dim();
    let z: f64 = h.eig()?.eigenvalues.iter().map(|l| (-l).exp()).sum();
    let mut notes = Vec::new();
    let h = if (z - 1.0).abs() > PARTITION_TOLERANCE {
        notes.push(format!("normalized H: Tr exp(-H) was {z}"));
        h + &HermitianMatrix::identity(n).scale(z.ln())
    } else {
        h.clone()
    };

    let gibbs = h.scale(-1.0).eig()?.apply(SpectralFn::Exp, DEFAULT_FLOOR)?;
    let exp_a = a.eig()?.apply(SpectralFn::Exp, DEFAULT_FLOOR)?;
    let lhs: f64 = (a - &h).eig()?.eigenvalues.iter().map(|l| l.exp()).sum();
    let mean_a = trace_of_product(a.as_matrix(), gibbs.as_matrix()).re;
    let gt = trace_of_product(gibbs.as_matrix(), exp_a.as_matrix()).re;

    let mut cert = Certificate::new("proofstep", ExtendedScalar::Finite(lhs), tolerance);
    cert.notes = notes;
    cert.lower_bound("peierls_bogoliubov", mean_a.exp());
    cert.upper_bound("golden_thompson", gt);
    Ok(cert.finish())
}

/// `D(ρ‖σ) ≥ D(T(ρ)‖T(σ))` for a Kraus channel `T`.
pub fn data_processing_certificate(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &KrausChannel,
    tolerance: f64,
) -> Result<Certificate> {
    require_dim(rho, channel.in_dim())?;
    require_dim(sigma, channel.in_dim())?;
    let lhs = relative_entropy(rho, sigma)?;
    let out = relative_entropy(&apply_channel(channel, rho)?, &apply_channel(channel, sigma)?)?;
    let mut cert = Certificate::new("data_processing", lhs, tolerance);
    if !lhs.is_finite() {
        cert.notes.push("infinite lhs: support of rho not contained in support of sigma".into());
    }
    cert.lower_bound("channel_output", out.to_f64());
    Ok(cert.finish())
}
