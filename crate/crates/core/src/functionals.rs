//! Scalar entropy functionals, in nats.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matcore::{trace_norm, CMatrix, DEFAULT_FLOOR};
use crate::states::{marginal, product_state, DensityMatrix};
use crate::tensor::TensorShape;

/// Eigenvalues at or below this contribute nothing to `−λ ln λ`.
pub const ENTROPY_FLOOR: f64 = 1e-15;

/// Projection weight outside `supp σ` above which `D(ρ‖σ)` is reported infinite.
pub const SUPPORT_WEIGHT_THRESHOLD: f64 = 1e-8;

/// A real number or `+∞`. Infinity only arises from a support violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedScalar {
    Finite(f64),
    Infinite,
}

impl ExtendedScalar {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedScalar::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedScalar::Finite(v) => Some(v),
            ExtendedScalar::Infinite => None,
        }
    }

    /// The value as an `f64`, with `+∞` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for ExtendedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedScalar::Finite(v) => write!(f, "{v}"),
            ExtendedScalar::Infinite => f.write_str("+inf"),
        }
    }
}

impl Serialize for ExtendedScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::serde_ext::serialize_f64(&self.to_f64(), s)
    }
}

fn check_same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(())
}

/// `|⟨vᵢ|w_k⟩|²` between the eigenbases of `ρ` (rows) and `σ` (columns).
fn eigenbasis_overlaps(rho: &DensityMatrix, sigma: &DensityMatrix) -> CMatrix {
    rho.spectrum().eigenvectors.adjoint() * &sigma.spectrum().eigenvectors
}

fn weights(rho: &DensityMatrix, sigma: &DensityMatrix) -> Vec<Vec<f64>> {
    let w = eigenbasis_overlaps(rho, sigma);
    (0..w.nrows())
        .map(|i| (0..w.ncols()).map(|k| w[(i, k)].norm_sqr()).collect())
        .collect()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    -rho.eigenvalues()
        .iter()
        .filter(|&&l| l > ENTROPY_FLOOR)
        .map(|&l| l * l.ln())
        .sum::<f64>()
}

/// `D(ρ‖σ) = Tr ρ(ln ρ − ln σ)` with support-restricted logarithms.
///
/// Returns `+∞` when an eigenvector of `ρ` carrying weight above the floor has
/// more than `1e-8` of its squared norm outside `supp σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ExtendedScalar> {
    check_same_dim(rho, sigma)?;
    let w = weights(rho, sigma);
    let lr = rho.eigenvalues();
    let ls = sigma.eigenvalues();

    let mut cross = 0.0;
    for (i, &l) in lr.iter().enumerate() {
        if l <= DEFAULT_FLOOR {
            continue;
        }
        let mut outside = 0.0;
        for (k, &s) in ls.iter().enumerate() {
            if s > DEFAULT_FLOOR {
                cross += l * w[i][k] * s.ln();
            } else {
                outside += w[i][k];
            }
        }
        if outside > SUPPORT_WEIGHT_THRESHOLD {
            return Ok(ExtendedScalar::Infinite);
        }
    }
    Ok(ExtendedScalar::Finite(-von_neumann_entropy(rho) - cross))
}

/// Petz–Rényi divergence `(α−1)⁻¹ ln Tr ρ^α σ^{1−α}` for `α ∈ (0, 1)`.
pub fn renyi_divergence(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<ExtendedScalar> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Renyi order must lie in (0, 1), got {alpha}"
        )));
    }
    check_same_dim(rho, sigma)?;
    let q = power_overlap(rho, sigma, alpha);
    if q <= 0.0 {
        return Ok(ExtendedScalar::Infinite);
    }
    Ok(ExtendedScalar::Finite(q.ln() / (alpha - 1.0)))
}

/// `Tr ρ^α σ^{1−α}` over the supports.
fn power_overlap(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> f64 {
    let w = weights(rho, sigma);
    let mut acc = 0.0;
    for (i, &l) in rho.eigenvalues().iter().enumerate() {
        if l <= DEFAULT_FLOOR {
            continue;
        }
        for (k, &s) in sigma.eigenvalues().iter().enumerate() {
            if s > DEFAULT_FLOOR {
                acc += l.powf(alpha) * s.powf(1.0 - alpha) * w[i][k];
            }
        }
    }
    acc
}

/// `Tr[√ρ √σ]`.
pub fn root_overlap(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let w = weights(rho, sigma);
    let mut acc = 0.0;
    for (i, &l) in rho.eigenvalues().iter().enumerate() {
        for (k, &s) in sigma.eigenvalues().iter().enumerate() {
            acc += l.sqrt() * s.sqrt() * w[i][k];
        }
    }
    Ok(acc)
}

/// `Tr[(√ρ − √σ)²]`, computed from the matrix square roots.
pub fn sqrt_distance_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let diff = &rho.sqrt() - &sigma.sqrt();
    Ok(diff.frobenius_norm().powi(2))
}

/// `Tr|ρ − σ|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    trace_norm(&(rho.matrix() - sigma.matrix()))
}

/// `S₁ + S₂ − S₁₂` for a bipartite state.
pub fn mutual_information(rho12: &DensityMatrix, shape: &TensorShape) -> Result<f64> {
    shape.require_bipartite()?;
    total_correlation(rho12, shape)
}

/// `Σⱼ S(ρⱼ) − S(ρ)` over the single-subsystem marginals.
pub fn total_correlation(rho: &DensityMatrix, shape: &TensorShape) -> Result<f64> {
    if shape.len() < 2 {
        return Err(Error::InvalidShape(format!(
            "{shape} needs at least two subsystems"
        )));
    }
    shape.check_dim(rho.dim())?;
    let mut sum = 0.0;
    for j in 0..shape.len() {
        sum += von_neumann_entropy(&marginal(rho, shape, &[j])?);
    }
    Ok(sum - von_neumann_entropy(rho))
}

/// `ρ₁ ⊗ … ⊗ ρ_N` built from the single-subsystem marginals.
pub fn product_of_marginals(rho: &DensityMatrix, shape: &TensorShape) -> Result<DensityMatrix> {
    shape.check_dim(rho.dim())?;
    let marginals = (0..shape.len())
        .map(|j| marginal(rho, shape, &[j]))
        .collect::<Result<Vec<_>>>()?;
    product_state(&marginals)
}
