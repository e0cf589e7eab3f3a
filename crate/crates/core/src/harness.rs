//! Seeded randomized sweeps over the certificate battery.
//!
//! Trial `i` of a sweep draws all of its inputs from the stream
//! `SplitMix64::new(trial_seed(seed, i))`, so any trial can be rebuilt from the
//! sweep seed and its index (or directly from the recorded trial seed).

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{renyi_divergence, relative_entropy, root_overlap, trace_distance};
use crate::matcore::{CMatrix, HermitianMatrix};
use crate::rng::{trial_seed, SplitMix64};
use crate::serde_ext::{serialize_f64, serialize_opt_f64};
use crate::states::{
    epsilon_mix, equality_family, marginal, random_channel, random_density, slater_pair,
    DensityMatrix,
};
use crate::tensor::{Block, BlockSpec, TensorShape};
use crate::theorems::{
    data_processing_certificate, divergence_bounds_certificate, gt3_certificate,
    monotonicity_certificate, multipartite_certificate, petz_residual, proofstep_certificate,
    subadditivity_certificate, Certificate, DEFAULT_TOLERANCE,
};

/// Limits enforced on generated equality-family instances.
pub const EQUALITY_LOG_RATIO_LIMIT: f64 = 1e-8;
pub const EQUALITY_GAP_LIMIT: f64 = 1e-7;
pub const EQUALITY_REMAINDER_LIMIT: f64 = 1e-7;
pub const EQUALITY_PETZ_LIMIT: f64 = 1e-7;

/// Largest Slater dimension `N²` the battery will build.
pub const SLATER_DIM_GUARD: usize = 128;

/// How many distinct error messages a report row keeps.
const ERROR_SAMPLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Subadditivity,
    Multipartite,
    DivergenceBounds,
    Monotonicity,
    Gt3,
    Proofstep,
    DataProcessing,
    Equality,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Subadditivity,
        Check::Multipartite,
        Check::DivergenceBounds,
        Check::Monotonicity,
        Check::Gt3,
        Check::Proofstep,
        Check::DataProcessing,
        Check::Equality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Subadditivity => "subadditivity",
            Check::Multipartite => "multipartite",
            Check::DivergenceBounds => "divergence_bounds",
            Check::Monotonicity => "monotonicity",
            Check::Gt3 => "gt3",
            Check::Proofstep => "proofstep",
            Check::DataProcessing => "data_processing",
            Check::Equality => "equality",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub checks: Vec<Check>,
    pub dims: Vec<TensorShape>,
    pub trials: usize,
    pub seed: u64,
    pub eps_mix: f64,
    pub tolerance: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let dims = [vec![2, 2], vec![2, 3], vec![3, 3], vec![2, 2, 2]]
            .into_iter()
            .map(|d| TensorShape::new(d).expect("static shape"))
            .collect();
        Self {
            checks: Check::ALL.to_vec(),
            dims,
            trials: 200,
            seed: 0,
            eps_mix: 1e-6,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.eps_mix) {
            return Err(Error::InvalidArgument(format!(
                "eps_mix must lie in [0, 1], got {}",
                self.eps_mix
            )));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
        }
        if self.checks.is_empty() || self.dims.is_empty() {
            return Err(Error::InvalidArgument("need at least one check and one shape".into()));
        }
        if let Some(s) = self.dims.iter().find(|s| s.len() < 2) {
            return Err(Error::InvalidShape(format!("{s} has fewer than two factors")));
        }
        Ok(())
    }
}

/// Aggregate for one `(check, shape)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: Check,
    pub shape: TensorShape,
    pub count: usize,
    pub failures: usize,
    /// Trials whose evaluator returned an error (counted separately from failures).
    pub errors: usize,
    pub error_samples: Vec<String>,
    #[serde(serialize_with = "serialize_f64")]
    pub min_slack: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub max_residual: f64,
    pub worst_trial: Option<usize>,
    pub worst_seed: Option<u64>,
    pub failing_seeds: Vec<u64>,
}

impl CheckReport {
    fn new(check: Check, shape: TensorShape) -> Self {
        Self {
            check,
            shape,
            count: 0,
            failures: 0,
            errors: 0,
            error_samples: Vec::new(),
            min_slack: f64::INFINITY,
            max_residual: 0.0,
            worst_trial: None,
            worst_seed: None,
            failing_seeds: Vec::new(),
        }
    }

    fn record(&mut self, trial: usize, seed: u64, outcome: &Result<Certificate>) {
        self.count += 1;
        match outcome {
            Ok(cert) => {
                let slack = cert.min_slack();
                if self.worst_trial.is_none() || slack < self.min_slack {
                    self.min_slack = slack;
                    self.worst_trial = Some(trial);
                    self.worst_seed = Some(seed);
                }
                self.max_residual = self.max_residual.max(cert.max_enforced_residual());
                if !cert.passed() {
                    self.failures += 1;
                    self.failing_seeds.push(seed);
                }
            }
            Err(e) => {
                self.errors += 1;
                let msg = e.to_string();
                if self.error_samples.len() < ERROR_SAMPLES && !self.error_samples.contains(&msg) {
                    self.error_samples.push(msg);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: SweepConfig,
    pub checks: Vec<CheckReport>,
    pub total_count: usize,
    pub total_failures: usize,
    pub total_errors: usize,
    /// Kept out of the JSON so that equal configs give byte-identical reports.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.total_failures == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();

    let mut cells: Vec<(Check, &TensorShape, usize)> = Vec::new();
    for &check in &config.checks {
        for shape in &config.dims {
            cells.extend((0..config.trials).map(|i| (check, shape, i)));
        }
    }
    // collect() keeps the input order, so the aggregation below is schedule independent
    let outcomes: Vec<(u64, Result<Certificate>)> = cells
        .par_iter()
        .map(|&(check, shape, i)| {
            let seed = trial_seed(config.seed, i as u64);
            (seed, run_trial(check, shape, seed, config.eps_mix, config.tolerance))
        })
        .collect();

    let mut rows: Vec<CheckReport> = Vec::new();
    for (&(check, shape, i), (seed, outcome)) in cells.iter().zip(&outcomes) {
        if i == 0 {
            rows.push(CheckReport::new(check, shape.clone()));
        }
        rows.last_mut().expect("row started").record(i, *seed, outcome);
    }

    Ok(Report {
        config: config.clone(),
        total_count: rows.iter().map(|r| r.count).sum(),
        total_failures: rows.iter().map(|r| r.failures).sum(),
        total_errors: rows.iter().map(|r| r.errors).sum(),
        checks: rows,
        wall_time: start.elapsed(),
    })
}

/// Re-runs trial `index` of a sweep started from `seed`.
pub fn replay_trial(
    check: Check,
    shape: &TensorShape,
    seed: u64,
    index: u64,
    eps_mix: f64,
    tolerance: f64,
) -> Result<Certificate> {
    run_trial(check, shape, trial_seed(seed, index), eps_mix, tolerance)
}

/// Builds the inputs of one trial from its stream seed and evaluates `check`.
pub fn run_trial(
    check: Check,
    shape: &TensorShape,
    stream_seed: u64,
    eps_mix: f64,
    tolerance: f64,
) -> Result<Certificate> {
    let mut rng = SplitMix64::new(stream_seed);
    let dim = shape.total();
    match check {
        Check::Subadditivity => {
            let cut = shape.first_cut()?;
            let rho = random_state(&mut rng, dim)?;
            subadditivity_certificate(&rho, &cut, tolerance)
        }
        Check::Multipartite => {
            let rho = random_state(&mut rng, dim)?;
            multipartite_certificate(&rho, shape, tolerance)
        }
        Check::DivergenceBounds => {
            let rho = random_state(&mut rng, dim)?;
            let sigma = random_state(&mut rng, dim)?;
            divergence_bounds_certificate(&rho, &sigma, tolerance)
        }
        Check::Monotonicity => {
            let cut = shape.first_cut()?;
            let rho12 = random_density(dim, dim, rng.next_u64())?;
            let sigma12 = mixed_state(&mut rng, dim, eps_mix)?;
            monotonicity_certificate(&rho12, &sigma12, &cut, tolerance)
        }
        Check::Gt3 => {
            let cut = shape.first_cut()?;
            let d1 = shape.dims()[0];
            let rho1 = random_density(d1, d1, rng.next_u64())?;
            let sigma12 = mixed_state(&mut rng, dim, eps_mix)?;
            let sigma1 = marginal(&sigma12, &cut, &[0])?;
            gt3_certificate(&rho1, &sigma1, &sigma12, &cut, tolerance)
        }
        Check::Proofstep => {
            let h = random_hermitian(&mut rng, dim);
            let a = random_hermitian(&mut rng, dim);
            proofstep_certificate(&h, &a, tolerance)
        }
        Check::DataProcessing => {
            let out = shape.dims()[0];
            let rho = random_state(&mut rng, dim)?;
            let sigma = mixed_state(&mut rng, dim, eps_mix)?;
            let n_kraus = 4.max(dim.div_ceil(out));
            let channel = random_channel(dim, out, n_kraus, rng.next_u64())?;
            data_processing_certificate(&rho, &sigma, &channel, tolerance)
        }
        Check::Equality => equality_trial(&mut rng, shape, tolerance),
    }
}

/// A state of uniformly random rank in `1..=dim`.
fn random_state(rng: &mut SplitMix64, dim: usize) -> Result<DensityMatrix> {
    let rank = 1 + rng.below(dim as u64) as usize;
    random_density(dim, rank, rng.next_u64())
}

fn mixed_state(rng: &mut SplitMix64, dim: usize, eps: f64) -> Result<DensityMatrix> {
    epsilon_mix(&random_state(rng, dim)?, eps)
}

/// `(G + G†)/2` with standard complex Gaussian `G`.
fn random_hermitian(rng: &mut SplitMix64, dim: usize) -> HermitianMatrix {
    let entries: Vec<Complex64> = (0..dim * dim).map(|_| rng.complex_gaussian()).collect();
    let g = CMatrix::from_row_slice(dim, dim, &entries);
    HermitianMatrix::hermitian_part(&g)
}

fn random_weights(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    // bounded away from 0 so every block carries weight
    let raw: Vec<f64> = (0..n).map(|_| 0.1 + rng.next_f64()).collect();
    let sum: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    let head: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - head;
    w
}

/// One to four blocks of left dimension one to three, right dimension the last
/// factor of `shape`, checked for every equality condition at once.
fn equality_trial(rng: &mut SplitMix64, shape: &TensorShape, tolerance: f64) -> Result<Certificate> {
    let right = *shape.dims().last().expect("validated shape");
    let n_blocks = 1 + rng.below(4) as usize;
    let q = random_weights(rng, n_blocks);
    let r = random_weights(rng, n_blocks);
    let blocks = (0..n_blocks)
        .map(|j| Block {
            weight_q: q[j],
            weight_r: r[j],
            left_dim: 1 + rng.below(3) as usize,
            right_dim: right,
        })
        .collect();
    let family = equality_family(&BlockSpec::new(blocks)?, rng.next_u64())?;
    equality_certificate(&family.rho12, &family.sigma12, &family.shape, tolerance)
}

/// Monotonicity certificate for a pair expected to satisfy the equality
/// conditions: log-ratio, gap, remainder and Petz residuals are all enforced.
pub fn equality_certificate(
    rho12: &DensityMatrix,
    sigma12: &DensityMatrix,
    shape: &TensorShape,
    tolerance: f64,
) -> Result<Certificate> {
    let mut cert = monotonicity_certificate(rho12, sigma12, shape, tolerance)?;
    cert.name = "equality".into();
    let gap = cert.lhs.to_f64();
    let remainder = cert.bound("remainder").map_or(f64::NAN, |b| b.lower);
    let petz = petz_residual(rho12, sigma12, shape)?;
    Ok(cert
        .enforce_residual("log_ratio", EQUALITY_LOG_RATIO_LIMIT)
        .with_residual("gap", gap.abs(), EQUALITY_GAP_LIMIT)
        .with_residual("remainder", remainder, EQUALITY_REMAINDER_LIMIT)
        .with_residual("petz", petz, EQUALITY_PETZ_LIMIT))
}

/// One `N` of the Slater battery. Errors are absolute deviations from the
/// closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlaterRow {
    pub n: usize,
    pub divergence: f64,
    pub divergence_error: f64,
    pub trace_norm: f64,
    pub trace_norm_error: f64,
    pub overlap: f64,
    pub renyi_half: f64,
    pub renyi: f64,
    pub renyi_slack: f64,
    pub pinsker: f64,
    pub hs: f64,
}

impl SlaterRow {
    pub fn max_error(&self) -> f64 {
        self.divergence_error
            .max(self.trace_norm_error)
            .max(self.renyi_slack.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlaterReport {
    pub n_max: usize,
    pub rows: Vec<SlaterRow>,
    #[serde(serialize_with = "serialize_opt_f64")]
    pub max_error: Option<f64>,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Closed-form values for the Slater pair: `D = ln(2N/(N−1))` and
/// `Tr|ρ−σ| = (N+1)/N`.
pub fn slater_closed_forms(n: usize) -> (f64, f64) {
    let nf = n as f64;
    ((2.0 * nf / (nf - 1.0)).ln(), (nf + 1.0) / nf)
}

pub fn slater_row(n: usize) -> Result<SlaterRow> {
    if n * n > SLATER_DIM_GUARD {
        return Err(Error::InvalidArgument(format!(
            "N = {n} needs dimension {} which exceeds the guard of {SLATER_DIM_GUARD}",
            n * n
        )));
    }
    let pair = slater_pair(n)?;
    let (d_exact, t_exact) = slater_closed_forms(n);
    let divergence = relative_entropy(&pair.rho, &pair.sigma)?.to_f64();
    let trace_norm = trace_distance(&pair.rho, &pair.sigma)?;
    let overlap = root_overlap(&pair.rho, &pair.sigma)?;
    let renyi_half = renyi_divergence(&pair.rho, &pair.sigma, 0.5)?.to_f64();

    let cert = subadditivity_certificate(&pair.rho, &pair.shape, DEFAULT_TOLERANCE)?;
    let lower = |label: &str| cert.bound(label).map_or(f64::NAN, |b| b.lower);
    let renyi = lower("renyi");
    Ok(SlaterRow {
        n,
        divergence,
        divergence_error: (divergence - d_exact).abs(),
        trace_norm,
        trace_norm_error: (trace_norm - t_exact).abs(),
        overlap,
        renyi_half,
        renyi,
        renyi_slack: cert.bound("renyi").map_or(f64::NAN, |b| b.slack),
        pinsker: lower("pinsker"),
        hs: lower("hs"),
    })
}

pub fn run_slater_battery(n_max: usize) -> Result<SlaterReport> {
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!("n_max must be at least 2, got {n_max}")));
    }
    let start = Instant::now();
    let rows = (2..=n_max).map(slater_row).collect::<Result<Vec<_>>>()?;
    let max_error = rows.iter().map(SlaterRow::max_error).reduce(f64::max);
    Ok(SlaterReport {
        n_max,
        rows,
        max_error,
        wall_time: start.elapsed(),
    })
}
