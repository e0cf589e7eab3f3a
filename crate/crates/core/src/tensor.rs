//! Tensor-product bookkeeping.
//!
//! Subsystem 0 is the slowest-varying index, i.e. the leftmost Kronecker factor.
//! Subsystem indices in this API are zero-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{CMatrix, HermitianMatrix};

/// Ordered subsystem dimensions `d₀, …, d_{N−1}` of a composite space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct TensorShape {
    dims: Vec<usize>,
}

impl TensorShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("no subsystems".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape(format!("zero dimension in {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn bipartite(d1: usize, d2: usize) -> Result<Self> {
        Self::new(vec![d1, d2])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Dimension of the ambient space, `Π dᵢ`.
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Collapses everything after the first factor: `(d₀, d₁·…·d_{N−1})`.
    pub fn first_cut(&self) -> Result<Self> {
        if self.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "{self} has fewer than two subsystems"
            )));
        }
        Self::bipartite(self.dims[0], self.dims[1..].iter().product())
    }

    pub fn require_bipartite(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(Error::InvalidShape(format!("{self} is not bipartite"))),
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::InvalidShape(format!(
                "{self} has total dimension {} but the matrix is {dim}x{dim}",
                self.total()
            )));
        }
        Ok(())
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.len()];
        for k in (0..self.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }
}

impl TryFrom<Vec<usize>> for TensorShape {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<TensorShape> for Vec<usize> {
    fn from(shape: TensorShape) -> Self {
        shape.dims
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Parses `"2x3"` or `"2,3"` style shapes.
impl FromStr for TensorShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let dims = s
            .split(['x', 'X', ','])
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidShape(format!("cannot parse '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }
}

/// Kronecker product of arbitrary complex matrices.
pub fn kron_matrix(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::hermitian_part(&kron_matrix(a.as_matrix(), b.as_matrix()))
}

/// Kronecker product of a non-empty list of factors, left to right.
pub fn kron_all(factors: &[HermitianMatrix]) -> HermitianMatrix {
    let (first, rest) = factors.split_first().expect("kron_all needs a factor");
    rest.iter().fold(first.clone(), |acc, f| kron(&acc, f))
}

fn sorted_keep(shape: &TensorShape, keep: &[usize]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument(
            "partial trace must keep at least one subsystem".into(),
        ));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    for w in kept.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidArgument(format!(
                "subsystem {} listed twice",
                w[0]
            )));
        }
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= shape.len()) {
        return Err(Error::InvalidSubsystem {
            index: bad,
            len: shape.len(),
        });
    }
    Ok(kept)
}

/// Flat offsets of every multi-index over `subsystems`.
fn offsets(shape: &TensorShape, strides: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &k in subsystems {
        let d = shape.dims()[k];
        out = out
            .iter()
            .flat_map(|&base| (0..d).map(move |i| base + i * strides[k]))
            .collect();
    }
    out
}

/// Flat offsets of the kept and of the traced multi-indices; ambient index
/// `keep[k] + traced[t]` pairs kept multi-index `k` with traced multi-index `t`.
pub(crate) fn split_offsets(shape: &TensorShape, keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let kept = sorted_keep(shape, keep)?;
    let traced: Vec<usize> = (0..shape.len()).filter(|k| !kept.contains(k)).collect();
    let strides = shape.strides();
    Ok((offsets(shape, &strides, &kept), offsets(shape, &strides, &traced)))
}

/// Partial trace over every subsystem not listed in `keep`, by direct summation
/// over the traced multi-indices. Works for non-Hermitian operators too.
pub fn partial_trace_matrix(m: &CMatrix, shape: &TensorShape, keep: &[usize]) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    shape.check_dim(m.nrows())?;
    let (keep_off, trace_off) = split_offsets(shape, keep)?;
    let n = keep_off.len();
    Ok(CMatrix::from_fn(n, n, |r, c| {
        trace_off
            .iter()
            .map(|&t| m[(keep_off[r] + t, keep_off[c] + t)])
            .sum()
    }))
}

pub fn partial_trace(
    m: &HermitianMatrix,
    shape: &TensorShape,
    keep: &[usize],
) -> Result<HermitianMatrix> {
    partial_trace_matrix(m.as_matrix(), shape, keep).map(|p| HermitianMatrix::hermitian_part(&p))
}

/// `I ⊗ … ⊗ A ⊗ … ⊗ I` with `A` in slot `at`.
pub fn lift_matrix(a: &CMatrix, shape: &TensorShape, at: usize) -> Result<CMatrix> {
    if at >= shape.len() {
        return Err(Error::InvalidSubsystem {
            index: at,
            len: shape.len(),
        });
    }
    let d = shape.dims()[at];
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: a.nrows(),
        });
    }
    let left: usize = shape.dims()[..at].iter().product();
    let right: usize = shape.dims()[at + 1..].iter().product();
    let id_left = CMatrix::identity(left, left);
    let id_right = CMatrix::identity(right, right);
    Ok(kron_matrix(&kron_matrix(&id_left, a), &id_right))
}

pub fn lift(a: &HermitianMatrix, shape: &TensorShape, at: usize) -> Result<HermitianMatrix> {
    lift_matrix(a.as_matrix(), shape, at).map(|m| HermitianMatrix::hermitian_part(&m))
}

/// Block-diagonal embedding `A₀ ⊕ A₁ ⊕ …`.
pub fn direct_sum(blocks: &[HermitianMatrix]) -> HermitianMatrix {
    let n: usize = blocks.iter().map(HermitianMatrix::dim).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        let d = b.dim();
        out.view_mut((at, at), (d, d)).copy_from(b.as_matrix());
        at += d;
    }
    HermitianMatrix::hermitian_part(&out)
}

/// One block of a direct-sum equality structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub weight_q: f64,
    pub weight_r: f64,
    pub left_dim: usize,
    pub right_dim: usize,
}

/// Block weights and dimensions for [`crate::states::equality_family`].
///
/// Both weight vectors are probability vectors (within `1e-12`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    blocks: Vec<Block>,
}

impl BlockSpec {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("block list is empty".into()));
        }
        for b in &blocks {
            if b.left_dim == 0 || b.right_dim == 0 {
                return Err(Error::InvalidArgument("block dimensions must be positive".into()));
            }
            if !(b.weight_q >= 0.0 && b.weight_r >= 0.0) {
                return Err(Error::InvalidArgument("block weights must be nonnegative".into()));
            }
        }
        let sum_q: f64 = blocks.iter().map(|b| b.weight_q).sum();
        let sum_r: f64 = blocks.iter().map(|b| b.weight_r).sum();
        if (sum_q - 1.0).abs() > 1e-12 {
            return Err(Error::WeightNormalization { which: "q", sum: sum_q });
        }
        if (sum_r - 1.0).abs() > 1e-12 {
            return Err(Error::WeightNormalization { which: "r", sum: sum_r });
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::hermitian_eig;
    use crate::rng::SplitMix64;
    use num_complex::Complex64;

    fn random_matrix(n: usize, rng: &mut SplitMix64) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| rng.complex_gaussian())
    }

    fn random_psd(n: usize, rng: &mut SplitMix64) -> HermitianMatrix {
        let g = random_matrix(n, rng);
        let p = HermitianMatrix::hermitian_part(&(&g * g.adjoint()));
        p.scale(1.0 / p.trace())
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn shape(d: &[usize]) -> TensorShape {
        TensorShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn shape_validation_and_parsing() {
        assert!(TensorShape::new(vec![]).is_err());
        assert!(TensorShape::new(vec![2, 0]).is_err());
        let s: TensorShape = "2x3x2".parse().unwrap();
        assert_eq!(s.dims(), &[2, 3, 2]);
        assert_eq!(s.total(), 12);
        assert_eq!(s.to_string(), "2x3x2");
        assert_eq!(s.first_cut().unwrap().dims(), &[2, 6]);
        assert!("2xq".parse::<TensorShape>().is_err());
    }

    #[test]
    fn kron_identities_and_diagonals() {
        let i6 = kron(&HermitianMatrix::identity(2), &HermitianMatrix::identity(3));
        assert_eq!(i6, HermitianMatrix::identity(6));
        let k = kron(
            &HermitianMatrix::from_real_diagonal(&[1.0, 0.0]),
            &HermitianMatrix::from_real_diagonal(&[0.0, 1.0]),
        );
        assert_eq!(k, HermitianMatrix::from_real_diagonal(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_trace_and_mixed_product() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..5 {
            let (a, b) = (random_matrix(2, &mut rng), random_matrix(3, &mut rng));
            let (c, d) = (random_matrix(2, &mut rng), random_matrix(3, &mut rng));
            let lhs = kron_matrix(&a, &b).trace();
            let rhs = a.trace() * b.trace();
            assert!((lhs - rhs).norm() < 1e-12);
            let mixed = kron_matrix(&a, &b) * kron_matrix(&c, &d);
            assert!(max_diff(&mixed, &kron_matrix(&(&a * &c), &(&b * &d))) < 1e-12);
        }
    }

    #[test]
    fn kron_associative() {
        let mut rng = SplitMix64::new(4);
        let (a, b, c) = (
            random_matrix(2, &mut rng),
            random_matrix(3, &mut rng),
            random_matrix(2, &mut rng),
        );
        let left = kron_matrix(&kron_matrix(&a, &b), &c);
        let right = kron_matrix(&a, &kron_matrix(&b, &c));
        assert!(max_diff(&left, &right) < 1e-13);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = SplitMix64::new(5);
        let r1 = random_psd(2, &mut rng);
        let r2 = random_psd(3, &mut rng);
        let joint = kron(&r1, &r2);
        let s = shape(&[2, 3]);
        let m1 = partial_trace(&joint, &s, &[0]).unwrap();
        let m2 = partial_trace(&joint, &s, &[1]).unwrap();
        assert!(max_diff(m1.as_matrix(), r1.as_matrix()) < 1e-14);
        assert!(max_diff(m2.as_matrix(), r2.as_matrix()) < 1e-14);
        let all = partial_trace(&joint, &s, &[1, 0]).unwrap();
        assert_eq!(all, joint);
    }

    #[test]
    fn bell_state_marginal() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CMatrix::from_column_slice(
            4,
            1,
            &[
                Complex64::new(h, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(h, 0.0),
            ],
        );
        let rho = HermitianMatrix::hermitian_part(&(&psi * psi.adjoint()));
        let m = partial_trace(&rho, &shape(&[2, 2]), &[0]).unwrap();
        let half = HermitianMatrix::identity(2).scale(0.5);
        assert!(max_diff(m.as_matrix(), half.as_matrix()) < 1e-15);
    }

    /// Brute force: `Tr_k M = Σ_i (I ⊗ ⟨i| ⊗ I) M (I ⊗ |i⟩ ⊗ I)` for one subsystem `k`.
    fn trace_out_one(m: &CMatrix, dims: &[usize], k: usize) -> CMatrix {
        let left: usize = dims[..k].iter().product();
        let right: usize = dims[k + 1..].iter().product();
        let d = dims[k];
        let mut out = CMatrix::zeros(left * right, left * right);
        for i in 0..d {
            let mut ket = CMatrix::zeros(d, 1);
            ket[(i, 0)] = Complex64::new(1.0, 0.0);
            let embed = kron_matrix(
                &kron_matrix(&CMatrix::identity(left, left), &ket),
                &CMatrix::identity(right, right),
            );
            out += embed.adjoint() * m * &embed;
        }
        out
    }

    #[test]
    fn sequential_and_joint_partial_traces_agree_with_oracle() {
        let mut rng = SplitMix64::new(6);
        let rho = random_psd(12, &mut rng);
        let s = shape(&[2, 3, 2]);
        let oracle = trace_out_one(&trace_out_one(rho.as_matrix(), &[2, 3, 2], 1), &[2, 2], 1);
        let joint = partial_trace(&rho, &s, &[0]).unwrap();
        let step = partial_trace(&rho, &s, &[0, 2]).unwrap();
        let step = partial_trace(&step, &shape(&[2, 2]), &[0]).unwrap();
        assert!(max_diff(joint.as_matrix(), &oracle) < 1e-14);
        assert!(max_diff(step.as_matrix(), &oracle) < 1e-14);
        let keep_02 = partial_trace(&rho, &s, &[0, 2]).unwrap();
        let oracle_02 = trace_out_one(rho.as_matrix(), &[2, 3, 2], 1);
        assert!(max_diff(keep_02.as_matrix(), &oracle_02) < 1e-14);
        assert!((keep_02.trace() - rho.trace()).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_errors() {
        let m = HermitianMatrix::identity(6);
        assert!(partial_trace(&m, &shape(&[2, 2]), &[0]).is_err());
        assert!(partial_trace(&m, &shape(&[2, 3]), &[2]).is_err());
        assert!(partial_trace(&m, &shape(&[2, 3]), &[]).is_err());
        assert!(partial_trace(&m, &shape(&[2, 3]), &[0, 0]).is_err());
    }

    #[test]
    fn adjoint_identity_and_positivity() {
        let mut rng = SplitMix64::new(8);
        let s = shape(&[3, 2]);
        for _ in 0..10 {
            let m = random_matrix(6, &mut rng);
            let a = random_matrix(3, &mut rng);
            let lhs = (lift_matrix(&a, &s, 0).unwrap() * &m).trace();
            let rhs = (&a * partial_trace_matrix(&m, &s, &[0]).unwrap()).trace();
            assert!((lhs - rhs).norm() < 1e-10);

            let rho = random_psd(6, &mut rng);
            let marg = partial_trace(&rho, &s, &[1]).unwrap();
            assert!(hermitian_eig(&marg).unwrap().min() >= -1e-10);
        }
    }

    #[test]
    fn lift_cases() {
        let s = shape(&[2, 2]);
        assert_eq!(
            lift(&HermitianMatrix::identity(2), &s, 1).unwrap(),
            HermitianMatrix::identity(4)
        );
        let l = lift(&HermitianMatrix::from_real_diagonal(&[0.1, 0.7]), &s, 0).unwrap();
        assert_eq!(l, HermitianMatrix::from_real_diagonal(&[0.1, 0.1, 0.7, 0.7]));
        assert!(lift(&HermitianMatrix::identity(3), &s, 0).is_err());

        let mut rng = SplitMix64::new(10);
        let s = shape(&[2, 3]);
        let a = random_psd(2, &mut rng);
        let b = random_psd(3, &mut rng);
        let la = lift(&a, &s, 0).unwrap().into_inner();
        let lb = lift(&b, &s, 1).unwrap().into_inner();
        assert!(max_diff(&(&la * &lb), kron(&a, &b).as_matrix()) < 1e-14);
        assert!(max_diff(&(&la * &lb), &(&lb * &la)) < 1e-14);
    }

    #[test]
    fn direct_sum_cases() {
        let a = HermitianMatrix::from_real_diagonal(&[0.3]);
        let b = HermitianMatrix::from_real_diagonal(&[0.7]);
        assert_eq!(
            direct_sum(&[a.clone(), b]),
            HermitianMatrix::from_real_diagonal(&[0.3, 0.7])
        );
        assert_eq!(direct_sum(std::slice::from_ref(&a)), a);

        let mut rng = SplitMix64::new(12);
        let x = random_psd(2, &mut rng);
        let y = random_psd(3, &mut rng);
        let mut union: Vec<f64> = hermitian_eig(&x).unwrap().eigenvalues;
        union.extend(hermitian_eig(&y).unwrap().eigenvalues);
        union.sort_by(f64::total_cmp);
        let sum = direct_sum(&[x.clone(), y.clone()]);
        let got = hermitian_eig(&sum).unwrap().eigenvalues;
        for (g, u) in got.iter().zip(&union) {
            assert!((g - u).abs() < 1e-13);
        }
        assert!((sum.trace() - x.trace() - y.trace()).abs() < 1e-14);
    }

    #[test]
    fn block_spec_validation() {
        let blk = |q, r| Block {
            weight_q: q,
            weight_r: r,
            left_dim: 2,
            right_dim: 2,
        };
        assert!(BlockSpec::new(vec![blk(0.5, 0.25), blk(0.5, 0.75)]).is_ok());
        assert!(matches!(
            BlockSpec::new(vec![blk(0.5, 0.25), blk(0.6, 0.75)]),
            Err(Error::WeightNormalization { which: "q", .. })
        ));
        assert!(BlockSpec::new(vec![]).is_err());
    }
}
