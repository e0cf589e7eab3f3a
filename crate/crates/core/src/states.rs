//! Density matrices, the state generators used by the certificates, and Kraus channels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{
    hermitian_eig, CMatrix, HermitianMatrix, SpectralFn, Spectrum, DEFAULT_FLOOR, TOL_PSD,
};
use crate::rng::SplitMix64;
use crate::tensor::{direct_sum, kron, partial_trace, split_offsets, BlockSpec, TensorShape};

/// Trace-one tolerance of [`validate_density`].
pub const TOL_TRACE: f64 = 1e-10;

/// Trace-preservation tolerance for Kraus channels.
pub const TOL_TP: f64 = 1e-10;

/// Limit on the log-ratio residual asserted when building an equality family.
pub const EQUALITY_CONSTRUCTION_LIMIT: f64 = 1e-8;

/// A validated state with its eigendecomposition cached.
///
/// Eigenvalues in `(-1e-10, 0)` are clamped to zero in the cached spectrum; the
/// matrix itself is stored exactly as given.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    spectrum: Spectrum,
}

impl DensityMatrix {
    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min()
    }

    /// Number of eigenvalues above `floor`.
    pub fn rank(&self, floor: f64) -> usize {
        self.spectrum.eigenvalues.iter().filter(|&&l| l > floor).count()
    }

    pub fn sqrt(&self) -> HermitianMatrix {
        self.spectrum.map(|l| l.sqrt())
    }

    /// Support-restricted logarithm.
    pub fn log(&self) -> HermitianMatrix {
        self.spectrum.map(|l| if l > DEFAULT_FLOOR { l.ln() } else { 0.0 })
    }

    pub fn apply(&self, func: SpectralFn) -> Result<HermitianMatrix> {
        self.spectrum.apply(func, DEFAULT_FLOOR)
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.matrix
    }
}

/// Checks positivity (eigenvalues ≥ −1e−10) and unit trace (within 1e−10).
pub fn validate_density(m: HermitianMatrix) -> Result<DensityMatrix> {
    let mut spectrum = hermitian_eig(&m)?;
    let min = spectrum.min();
    if min < -TOL_PSD {
        return Err(Error::NotPositive { defect: -min });
    }
    let trace = m.trace();
    if (trace - 1.0).abs() > TOL_TRACE {
        return Err(Error::TraceNotOne { trace });
    }
    for l in &mut spectrum.eigenvalues {
        *l = l.max(0.0);
    }
    Ok(DensityMatrix {
        matrix: m,
        spectrum,
    })
}

/// Validation starting from a raw matrix, so hermiticity is checked as well.
pub fn validate_density_matrix(m: CMatrix) -> Result<DensityMatrix> {
    validate_density(HermitianMatrix::new(m)?)
}

pub fn maximally_mixed(dim: usize) -> DensityMatrix {
    validate_density(HermitianMatrix::identity(dim).scale(1.0 / dim as f64))
        .expect("maximally mixed state is valid")
}

/// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
pub fn pure_state(amplitudes: &[Complex64]) -> Result<DensityMatrix> {
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero state vector".into()));
    }
    let psi = CMatrix::from_column_slice(amplitudes.len(), 1, amplitudes).unscale(norm.sqrt());
    validate_density(HermitianMatrix::hermitian_part(&(&psi * psi.adjoint())))
}

pub fn product_state(factors: &[DensityMatrix]) -> Result<DensityMatrix> {
    let mats: Vec<HermitianMatrix> = factors.iter().map(|f| f.matrix().clone()).collect();
    validate_density(crate::tensor::kron_all(&mats))
}

/// Marginal on the subsystems listed in `keep`.
pub fn marginal(rho: &DensityMatrix, shape: &TensorShape, keep: &[usize]) -> Result<DensityMatrix> {
    validate_density(partial_trace(rho.matrix(), shape, keep)?)
}

/// Ginibre-induced random state `G G† / Tr(G G†)` with `G` a `dim × rank`
/// complex Gaussian matrix whose entries are drawn row by row.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "random_density needs 1 <= rank <= dim, got dim {dim}, rank {rank}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut g = CMatrix::zeros(dim, rank);
    for i in 0..dim {
        for j in 0..rank {
            g[(i, j)] = rng.complex_gaussian();
        }
    }
    let w = HermitianMatrix::hermitian_part(&(&g * g.adjoint()));
    validate_density(w.scale(1.0 / w.trace()))
}

/// The two-particle reduced state of the `N`-particle Slater determinant and
/// the product of its one-particle marginals.
#[derive(Debug, Clone)]
pub struct SlaterPair {
    pub n: usize,
    /// Normalized projector onto the antisymmetric subspace of `C^N ⊗ C^N`.
    pub rho: DensityMatrix,
    /// `I / N²`.
    pub sigma: DensityMatrix,
    pub shape: TensorShape,
}

pub fn slater_pair(n: usize) -> Result<SlaterPair> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Slater pair needs N >= 2, got {n}"
        )));
    }
    let dim = n * n;
    // (I − SWAP)/2, then normalize by the antisymmetric dimension N(N−1)/2.
    let weight = 1.0 / (n * (n - 1)) as f64;
    let mut p = CMatrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            let ij = i * n + j;
            let ji = j * n + i;
            p[(ij, ij)] += Complex64::new(weight, 0.0);
            p[(ij, ji)] -= Complex64::new(weight, 0.0);
        }
    }
    Ok(SlaterPair {
        n,
        rho: validate_density(HermitianMatrix::new(p)?)?,
        sigma: maximally_mixed(dim),
        shape: TensorShape::bipartite(n, n)?,
    })
}

/// States built on a block structure for which relative entropy is preserved
/// under the partial trace over the second factor.
#[derive(Debug, Clone)]
pub struct EqualityFamily {
    pub rho12: DensityMatrix,
    pub sigma12: DensityMatrix,
    pub shape: TensorShape,
    /// Per-block `(ρ₁ⱼ, σ₁ⱼ)` on the left factor.
    pub left_blocks: Vec<(DensityMatrix, DensityMatrix)>,
    /// Per-block state on the second factor, shared by ρ and σ.
    pub shared: Vec<DensityMatrix>,
    /// Frobenius norm of `(ln ρ₁₂ − ln σ₁₂) − (ln ρ₁ − ln σ₁) ⊗ I` at construction.
    pub log_residual: f64,
}

/// Builds `ρ₁₂ = ⊕ⱼ qⱼ ρ₁ⱼ ⊗ τⱼ`, `σ₁₂ = ⊕ⱼ rⱼ σ₁ⱼ ⊗ τⱼ` with the block
/// structure on the first factor (`H₁ = ⊕ⱼ H₁ⱼ`) and one shared second factor.
///
/// Every block must have the same `right_dim` and strictly positive weights.
/// Per block the seeds for `ρ₁ⱼ`, `σ₁ⱼ`, `τⱼ` are drawn in that order from the
/// stream started at `seed`.
pub fn equality_family(blocks: &BlockSpec, seed: u64) -> Result<EqualityFamily> {
    let specs = blocks.blocks();
    let right = specs[0].right_dim;
    if specs.iter().any(|b| b.right_dim != right) {
        return Err(Error::InvalidArgument(
            "all blocks must share the same right dimension".into(),
        ));
    }
    if specs.iter().any(|b| b.weight_q <= 0.0 || b.weight_r <= 0.0) {
        return Err(Error::InvalidArgument(
            "equality family needs strictly positive block weights".into(),
        ));
    }

    let mut rng = SplitMix64::new(seed);
    let mut left_blocks = Vec::with_capacity(specs.len());
    let mut shared = Vec::with_capacity(specs.len());
    let mut rho_parts = Vec::with_capacity(specs.len());
    let mut sigma_parts = Vec::with_capacity(specs.len());
    for b in specs {
        let r1 = random_density(b.left_dim, b.left_dim, rng.next_u64())?;
        let s1 = random_density(b.left_dim, b.left_dim, rng.next_u64())?;
        let tau = random_density(right, right, rng.next_u64())?;
        rho_parts.push(kron(r1.matrix(), tau.matrix()).scale(b.weight_q));
        sigma_parts.push(kron(s1.matrix(), tau.matrix()).scale(b.weight_r));
        left_blocks.push((r1, s1));
        shared.push(tau);
    }
    let left: usize = specs.iter().map(|b| b.left_dim).sum();
    let shape = TensorShape::bipartite(left, right)?;
    let rho12 = validate_density(direct_sum(&rho_parts))?;
    let sigma12 = validate_density(direct_sum(&sigma_parts))?;

    let log_residual = crate::theorems::log_ratio_residual(&rho12, &sigma12, &shape)?;
    if log_residual > EQUALITY_CONSTRUCTION_LIMIT {
        return Err(Error::ConstructionCheck {
            what: "log-ratio",
            residual: log_residual,
            limit: EQUALITY_CONSTRUCTION_LIMIT,
        });
    }
    Ok(EqualityFamily {
        rho12,
        sigma12,
        shape,
        left_blocks,
        shared,
        log_residual,
    })
}

/// `(1 − eps)·ρ + eps·I/d`.
pub fn epsilon_mix(rho: &DensityMatrix, eps: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!(
            "epsilon_mix needs eps in [0, 1], got {eps}"
        )));
    }
    if eps == 0.0 {
        return Ok(rho.clone());
    }
    let d = rho.dim();
    let mixed = &rho.matrix().scale(1.0 - eps) + &HermitianMatrix::identity(d).scale(eps / d as f64);
    validate_density(mixed)
}

/// A completely positive trace-preserving map in Kraus form, `ρ ↦ Σ K ρ K†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus_ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(in_dim: usize, out_dim: usize, kraus_ops: Vec<CMatrix>) -> Result<Self> {
        if kraus_ops.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one Kraus operator".into()));
        }
        for k in &kraus_ops {
            if k.nrows() != out_dim || k.ncols() != in_dim {
                return Err(Error::InvalidArgument(format!(
                    "Kraus operator is {}x{}, expected {out_dim}x{in_dim}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let mut sum = CMatrix::zeros(in_dim, in_dim);
        for k in &kraus_ops {
            sum += k.adjoint() * k;
        }
        let defect = (sum - CMatrix::identity(in_dim, in_dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > TOL_TP {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(Self {
            in_dim,
            out_dim,
            kraus_ops,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, dim, vec![CMatrix::identity(dim, dim)]).expect("identity channel")
    }

    /// `ρ ↦ Tr(ρ)·I/out_dim`.
    pub fn completely_depolarizing(in_dim: usize, out_dim: usize) -> Self {
        let amp = Complex64::new(1.0 / (out_dim as f64).sqrt(), 0.0);
        let mut ops = Vec::with_capacity(in_dim * out_dim);
        for i in 0..out_dim {
            for j in 0..in_dim {
                let mut k = CMatrix::zeros(out_dim, in_dim);
                k[(i, j)] = amp;
                ops.push(k);
            }
        }
        Self::new(in_dim, out_dim, ops).expect("depolarizing channel")
    }

    /// The partial trace onto `keep` in Kraus form: one operator
    /// `K_t = Σ_k |k⟩⟨k, t|` per traced multi-index `t`.
    pub fn partial_trace(shape: &TensorShape, keep: &[usize]) -> Result<Self> {
        let (keep_off, trace_off) = split_offsets(shape, keep)?;
        let (n, out) = (shape.total(), keep_off.len());
        let ops = trace_off
            .iter()
            .map(|&t| {
                let mut k = CMatrix::zeros(out, n);
                for (row, &base) in keep_off.iter().enumerate() {
                    k[(row, base + t)] = Complex64::new(1.0, 0.0);
                }
                k
            })
            .collect();
        Self::new(n, out, ops)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    /// `Σ K M K†` on an arbitrary operator.
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.in_dim || m.ncols() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                found: m.nrows(),
            });
        }
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus_ops {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }
}

pub fn apply_channel(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = channel.apply_matrix(rho.matrix().as_matrix())?;
    validate_density(HermitianMatrix::hermitian_part(&out))
}

/// Random channel from a Haar-like isometry `V: C^in → C^{n_kraus·out}`; the
/// Kraus operators are the consecutive `out × in` row blocks of `V`.
pub fn random_channel(in_dim: usize, out_dim: usize, n_kraus: usize, seed: u64) -> Result<KrausChannel> {
    if in_dim == 0 || out_dim == 0 || n_kraus == 0 {
        return Err(Error::InvalidArgument("channel dimensions must be positive".into()));
    }
    let rows = n_kraus * out_dim;
    if rows < in_dim {
        return Err(Error::InvalidArgument(format!(
            "{n_kraus} Kraus operators of size {out_dim}x{in_dim} cannot be trace preserving"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut g = CMatrix::zeros(rows, in_dim);
    for i in 0..rows {
        for j in 0..in_dim {
            g[(i, j)] = rng.complex_gaussian();
        }
    }
    let v = g.qr().q();
    let ops = (0..n_kraus)
        .map(|k| v.rows(k * out_dim, out_dim).into_owned())
        .collect();
    KrausChannel::new(in_dim, out_dim, ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Block;

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn validation_outcomes() {
        assert!(validate_density(HermitianMatrix::identity(2).scale(0.5)).is_ok());
        match validate_density(HermitianMatrix::from_real_diagonal(&[1.2, -0.2])) {
            Err(Error::NotPositive { defect }) => assert!((defect - 0.2).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        match validate_density(HermitianMatrix::from_real_diagonal(&[0.6, 0.6])) {
            Err(Error::TraceNotOne { trace }) => assert!((trace - 1.2).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        let skew = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.1, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        );
        assert!(matches!(
            validate_density_matrix(skew),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn random_density_contract() {
        let one = random_density(1, 1, 42).unwrap();
        assert!((one.matrix().as_matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        let a = random_density(5, 5, 17).unwrap();
        let b = random_density(5, 5, 17).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = random_density(5, 5, 18).unwrap();
        assert_ne!(a.matrix(), c.matrix());
        let low = random_density(4, 2, 3).unwrap();
        assert_eq!(low.rank(1e-10), 2);
        assert!(random_density(3, 4, 0).is_err());
    }

    #[test]
    fn slater_structure() {
        assert!(slater_pair(1).is_err());
        for n in 2..=6 {
            let pair = slater_pair(n).unwrap();
            let expected_rank = n * (n - 1) / 2;
            assert_eq!(pair.rho.rank(1e-10), expected_rank);
            let m = partial_trace(pair.rho.matrix(), &pair.shape, &[0]).unwrap();
            let mixed = HermitianMatrix::identity(n).scale(1.0 / n as f64);
            assert!(max_diff(m.as_matrix(), mixed.as_matrix()) < 1e-10);
            let m2 = partial_trace(pair.rho.matrix(), &pair.shape, &[1]).unwrap();
            assert!(max_diff(m2.as_matrix(), mixed.as_matrix()) < 1e-10);
        }
        // N = 2: the singlet projector.
        let pair = slater_pair(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = pure_state(&[
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!(max_diff(pair.rho.matrix().as_matrix(), singlet.matrix().as_matrix()) < 1e-15);
    }

    fn two_block_spec() -> BlockSpec {
        BlockSpec::new(vec![
            Block {
                weight_q: 0.5,
                weight_r: 0.25,
                left_dim: 2,
                right_dim: 2,
            },
            Block {
                weight_q: 0.5,
                weight_r: 0.75,
                left_dim: 2,
                right_dim: 2,
            },
        ])
        .unwrap()
    }

    #[test]
    fn equality_family_construction() {
        let fam = equality_family(&two_block_spec(), 99).unwrap();
        assert_eq!(fam.shape.dims(), &[4, 2]);
        assert!(fam.log_residual <= EQUALITY_CONSTRUCTION_LIMIT);
        // The first marginal is the weighted direct sum of the left blocks.
        let m = partial_trace(fam.rho12.matrix(), &fam.shape, &[0]).unwrap();
        let expected = direct_sum(&[
            fam.left_blocks[0].0.matrix().scale(0.5),
            fam.left_blocks[1].0.matrix().scale(0.5),
        ]);
        assert!(max_diff(m.as_matrix(), expected.as_matrix()) < 1e-14);
    }

    #[test]
    fn equality_family_single_block_identical_states() {
        // One block with q = r and a fixed seed: ρ₁₂ and σ₁₂ share τ but use
        // independent left factors, so equality of the pair needs ρ₁ = σ₁.
        let spec = BlockSpec::new(vec![Block {
            weight_q: 1.0,
            weight_r: 1.0,
            left_dim: 1,
            right_dim: 3,
        }])
        .unwrap();
        let fam = equality_family(&spec, 5).unwrap();
        assert!(max_diff(fam.rho12.matrix().as_matrix(), fam.sigma12.matrix().as_matrix()) < 1e-15);
    }

    #[test]
    fn equality_family_rejects_bad_blocks() {
        let mismatched = BlockSpec::new(vec![
            Block {
                weight_q: 0.5,
                weight_r: 0.5,
                left_dim: 2,
                right_dim: 2,
            },
            Block {
                weight_q: 0.5,
                weight_r: 0.5,
                left_dim: 2,
                right_dim: 3,
            },
        ])
        .unwrap();
        assert!(equality_family(&mismatched, 0).is_err());
        let zero = BlockSpec::new(vec![
            Block {
                weight_q: 1.0,
                weight_r: 0.5,
                left_dim: 2,
                right_dim: 2,
            },
            Block {
                weight_q: 0.0,
                weight_r: 0.5,
                left_dim: 2,
                right_dim: 2,
            },
        ])
        .unwrap();
        assert!(equality_family(&zero, 0).is_err());
    }

    #[test]
    fn epsilon_mix_contract() {
        let rho = random_density(3, 1, 8).unwrap();
        assert_eq!(epsilon_mix(&rho, 0.0).unwrap().matrix(), rho.matrix());
        let full = epsilon_mix(&rho, 1.0).unwrap();
        assert!(max_diff(full.matrix().as_matrix(), maximally_mixed(3).matrix().as_matrix()) < 1e-15);
        let eps = 1e-3;
        let mixed = epsilon_mix(&rho, eps).unwrap();
        assert!(mixed.min_eigenvalue() >= eps / 3.0 - 1e-15);
        assert!(epsilon_mix(&rho, 1.5).is_err());
    }

    #[test]
    fn channel_basics() {
        let rho = random_density(3, 3, 1).unwrap();
        let same = apply_channel(&KrausChannel::identity(3), &rho).unwrap();
        assert!(max_diff(same.matrix().as_matrix(), rho.matrix().as_matrix()) < 1e-15);
        let dep = apply_channel(&KrausChannel::completely_depolarizing(3, 2), &rho).unwrap();
        assert!(max_diff(dep.matrix().as_matrix(), maximally_mixed(2).matrix().as_matrix()) < 1e-14);
        assert!(apply_channel(&KrausChannel::identity(2), &rho).is_err());
        let bad = KrausChannel::new(2, 2, vec![CMatrix::identity(2, 2).scale(0.5)]);
        assert!(matches!(bad, Err(Error::NotTracePreserving { .. })));
    }

    #[test]
    fn partial_trace_channel_matches_partial_trace() {
        let shape = TensorShape::new(vec![2, 3, 2]).unwrap();
        let rho = random_density(12, 12, 21).unwrap();
        for keep in [vec![0], vec![1], vec![0, 2], vec![1, 2]] {
            let ch = KrausChannel::partial_trace(&shape, &keep).unwrap();
            let via_channel = apply_channel(&ch, &rho).unwrap();
            let direct = partial_trace(rho.matrix(), &shape, &keep).unwrap();
            assert!(max_diff(via_channel.matrix().as_matrix(), direct.as_matrix()) < 1e-14);
        }
    }

    #[test]
    fn random_channel_contract() {
        let scalar = random_channel(1, 1, 1, 4).unwrap();
        assert!((scalar.kraus_ops()[0][(0, 0)].norm() - 1.0).abs() < 1e-15);
        let one = random_density(1, 1, 0).unwrap();
        assert_eq!(apply_channel(&scalar, &one).unwrap().dim(), 1);

        let a = random_channel(3, 2, 4, 77).unwrap();
        let b = random_channel(3, 2, 4, 77).unwrap();
        assert_eq!(a, b);
        let mut sum = CMatrix::zeros(3, 3);
        for k in a.kraus_ops() {
            for i in 0..3 {
                for j in 0..3 {
                    for r in 0..2 {
                        sum[(i, j)] += k[(r, i)].conj() * k[(r, j)];
                    }
                }
            }
        }
        assert!(max_diff(&sum, &CMatrix::identity(3, 3)) < 1e-10);
        assert!(random_channel(5, 2, 2, 0).is_err());

        let rho = random_density(3, 3, 2).unwrap();
        let out = apply_channel(&a, &rho).unwrap();
        assert!((out.matrix().trace() - 1.0).abs() < 1e-10);
        assert!(out.min_eigenvalue() >= 0.0);
    }
}
