//! Synthetic problems and the success-ratio experiments.
//!
//! Ground truth is `A = P * Q` (t-product) with Gaussian factors
//! `P: n1 x r x n3`, `Q: r x n2 x n3` whose entries have mean 0 and variance
//! `1 / sqrt(n1 n3)`. Every trial regenerates its own ground
//! truth, mask or corruption, and initialisation from a seed derived from
//! `(base seed, cell, trial)`, so a grid gives the same result no matter the
//! order in which trials run. PSTNN and TNN runs of the same trial see the
//! same problem instance.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::metrics::{self, SUCCESS_RSE};
use crate::solvers::{self, SolverConfig};
use crate::talgebra::{t_product, RankTarget};
use crate::tensor::{Dims, Mask, Tensor3};

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream seed for `(base, a, b)`.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    mix(mix(mix(base) ^ a) ^ b)
}

/// Random tensor of tubal rank at most `r`.
pub fn gen_low_tubal_rank(dims: impl Into<Dims>, r: usize, seed: u64) -> Result<Tensor3> {
    let dims = dims.into().validate()?;
    let max = dims.min_side();
    if r == 0 || r > max {
        return Err(Error::InvalidRank { rank: r, max });
    }
    // variance 1/sqrt(n1 n3)
    let std = 1.0 / libm::sqrt(libm::sqrt((dims.n1 * dims.n3) as f64));
    let normal = Normal::new(0.0, std).expect("std is positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = Tensor3::from_fn((dims.n1, r, dims.n3), |_, _, _| normal.sample(&mut rng))?;
    let q = Tensor3::from_fn((r, dims.n2, dims.n3), |_, _, _| normal.sample(&mut rng))?;
    t_product(&p, &q)
}

/// Number of entries picked for a fraction `rate` of `total`.
pub fn pick_count(rate: f64, total: usize) -> usize {
    let n = libm::round(rate * total as f64);
    (n.max(0.0) as usize).min(total)
}

/// Observes exactly `round(rate * n1 n2 n3)` entries, uniformly without
/// replacement.
pub fn sample_mask(dims: impl Into<Dims>, rate: f64, seed: u64) -> Result<Mask> {
    let dims = dims.into().validate()?;
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidConfig("sampling rate must lie in (0, 1]"));
    }
    let total = dims.len();
    let mut observed = alloc::vec![false; total];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in index::sample(&mut rng, total, pick_count(rate, total)) {
        observed[p] = true;
    }
    Mask::from_vec(dims, observed)
}

/// Default range of additive sparse noise.
pub const NOISE_RANGE: (f64, f64) = (-1.0, 1.0);

/// Adds uniform noise from `range` to `round(rho_s * total)` entries picked
/// without replacement. Returns the corrupted tensor and the corrupted set.
pub fn corrupt_sparse(a: &Tensor3, rho_s: f64, range: (f64, f64), seed: u64) -> Result<(Tensor3, Mask)> {
    if !(0.0..1.0).contains(&rho_s) {
        return Err(Error::InvalidConfig("sparsity must lie in [0, 1)"));
    }
    if range.0 >= range.1 || !range.0.is_finite() || !range.1.is_finite() {
        return Err(Error::InvalidConfig("noise range must be a finite, non-empty interval"));
    }
    let dims = a.dims();
    let total = dims.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, total, pick_count(rho_s, total)).into_vec();
    picked.sort_unstable();
    let mut out = a.clone();
    let mut flags = alloc::vec![false; total];
    for p in picked {
        out.as_mut_slice()[p] += rng.random_range(range.0..range.1);
        flags[p] = true;
    }
    Ok((out, Mask::from_vec(dims, flags)?))
}

/// Recovery problem of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    /// Second axis is the sampling rate.
    Completion,
    /// Second axis is the corruption sparsity.
    Rpca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Rank target equal to the ground-truth tubal rank.
    Pstnn,
    /// Rank target 0.
    Tnn,
}

impl Method {
    pub fn target(self, rank: usize) -> RankTarget {
        match self {
            Method::Pstnn => RankTarget::Uniform(rank),
            Method::Tnn => RankTarget::Uniform(0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Pstnn => "pstnn",
            Method::Tnn => "tnn",
        }
    }
}

/// Solver settings that override the task defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverOverrides {
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iters: Option<usize>,
}

impl SolverOverrides {
    /// Task defaults with these overrides applied.
    pub fn config(&self, task: Task, target: RankTarget) -> SolverConfig {
        let mut cfg = match task {
            Task::Completion => SolverConfig::completion(target),
            Task::Rpca => SolverConfig::rpca(target),
        };
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        if self.lambda.is_some() {
            cfg.lambda = self.lambda;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        cfg
    }
}

/// One seeded recovery run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub task: Task,
    pub dims: Dims,
    pub rank: usize,
    /// Sampling rate (completion) or sparsity (robust PCA).
    pub level: f64,
    pub method: Method,
    pub overrides: SolverOverrides,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// `None` when the solver returned an error.
    pub rse: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl TrialOutcome {
    pub fn is_success(&self, threshold: f64) -> bool {
        self.rse.is_some_and(|r| metrics::is_success(r, threshold))
    }
}

const STREAM_TRUTH: u64 = 0;
const STREAM_SAMPLE: u64 = 1;
const STREAM_INIT: u64 = 2;

/// Builds the trial's instance and runs the solver.
pub fn run_trial(spec: &TrialSpec) -> Result<TrialOutcome> {
    let truth = gen_low_tubal_rank(spec.dims, spec.rank, derive_seed(spec.seed, STREAM_TRUTH, 0))?;
    let mut cfg = spec.overrides.config(spec.task, spec.method.target(spec.rank));
    let sample_seed = derive_seed(spec.seed, STREAM_SAMPLE, 0);
    let result = match spec.task {
        Task::Completion => {
            let mask = sample_mask(spec.dims, spec.level, sample_seed)?;
            cfg.seed = derive_seed(spec.seed, STREAM_INIT, 0);
            solvers::complete(&truth, &mask, &cfg)?
        }
        Task::Rpca => {
            let (o, _) = corrupt_sparse(&truth, spec.level, NOISE_RANGE, sample_seed)?;
            solvers::rpca(&o, &cfg)?
        }
    };
    Ok(TrialOutcome {
        rse: Some(metrics::rse(result.estimate(), &truth)?),
        iterations: result.iterations,
        converged: result.converged,
    })
}

/// Like [`run_trial`], recording solver errors as failed trials.
pub fn run_trial_lenient(spec: &TrialSpec) -> TrialOutcome {
    run_trial(spec).unwrap_or(TrialOutcome { rse: None, iterations: 0, converged: false })
}

/// Axes and protocol of a success-ratio experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub task: Task,
    pub dims: Dims,
    pub ranks: Vec<usize>,
    pub levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub threshold: f64,
    pub overrides: SolverOverrides,
}

impl GridSpec {
    pub fn new(task: Task, dims: impl Into<Dims>, ranks: Vec<usize>, levels: Vec<f64>) -> Self {
        Self {
            task,
            dims: dims.into(),
            ranks,
            levels,
            trials: 10,
            seed: 0,
            threshold: SUCCESS_RSE,
            overrides: SolverOverrides::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        if self.ranks.is_empty() || self.levels.is_empty() {
            return Err(Error::InvalidConfig("grid axes must be non-empty"));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1"));
        }
        let max = self.dims.min_side();
        if let Some(&r) = self.ranks.iter().find(|&&r| r == 0 || r > max) {
            return Err(Error::InvalidRank { rank: r, max });
        }
        let ok = |l: f64| match self.task {
            Task::Completion => l > 0.0 && l <= 1.0,
            Task::Rpca => (0.0..1.0).contains(&l),
        };
        if !self.levels.iter().all(|&l| ok(l)) {
            return Err(Error::InvalidConfig("grid level out of range"));
        }
        Ok(())
    }

    /// All trials for one method, cell by cell (rank-major), trial index
    /// fastest.
    pub fn trials(&self, method: Method) -> Vec<TrialSpec> {
        let mut out = Vec::with_capacity(self.ranks.len() * self.levels.len() * self.trials);
        for (ri, &rank) in self.ranks.iter().enumerate() {
            for (li, &level) in self.levels.iter().enumerate() {
                let cell = (ri * self.levels.len() + li) as u64;
                for t in 0..self.trials {
                    out.push(TrialSpec {
                        task: self.task,
                        dims: self.dims,
                        rank,
                        level,
                        method,
                        overrides: self.overrides,
                        seed: derive_seed(self.seed, cell, t as u64),
                    });
                }
            }
        }
        out
    }
}

/// Success ratios over `(rank, level)` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessGrid {
    pub ranks: Vec<usize>,
    pub levels: Vec<f64>,
    /// Row-major: `cells[ri * levels.len() + li]`.
    pub cells: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl SuccessGrid {
    /// Tallies outcomes ordered as [`GridSpec::trials`].
    pub fn tally(spec: &GridSpec, outcomes: &[TrialOutcome]) -> Result<Self> {
        let ncell = spec.ranks.len() * spec.levels.len();
        if outcomes.len() != ncell * spec.trials {
            return Err(Error::InvalidConfig("outcome count does not match the grid"));
        }
        let cells = outcomes
            .chunks(spec.trials)
            .map(|c| c.iter().filter(|o| o.is_success(spec.threshold)).count() as f64 / spec.trials as f64)
            .collect();
        Ok(Self { ranks: spec.ranks.clone(), levels: spec.levels.clone(), cells, trials: spec.trials, seed: spec.seed })
    }

    pub fn get(&self, rank: usize, level: f64) -> Option<f64> {
        let ri = self.ranks.iter().position(|&r| r == rank)?;
        let li = self.levels.iter().position(|&l| l == level)?;
        Some(self.cells[ri * self.levels.len() + li])
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// Cellwise `self - other`.
    pub fn difference(&self, other: &SuccessGrid) -> Vec<f64> {
        self.cells.iter().zip(&other.cells).map(|(a, b)| a - b).collect()
    }

    pub fn to_csv(&self, corner: &str) -> String {
        grid_csv(corner, &self.ranks, &self.levels, &self.cells)
    }
}

/// Header row `corner,level...`, then one row per rank. LF line endings.
pub fn grid_csv(corner: &str, ranks: &[usize], levels: &[f64], cells: &[f64]) -> String {
    let mut s = String::from(corner);
    for l in levels {
        let _ = write!(s, ",{l}");
    }
    s.push('\n');
    for (ri, r) in ranks.iter().enumerate() {
        s.push_str(&format!("{r}"));
        for v in &cells[ri * levels.len()..(ri + 1) * levels.len()] {
            // avoid "-0" in difference grids
            let v = if *v == 0.0 { 0.0 } else { *v };
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// Runs every trial of the grid sequentially.
pub fn phase_diagram(spec: &GridSpec, method: Method) -> Result<SuccessGrid> {
    spec.validate()?;
    let outcomes: Vec<TrialOutcome> = spec.trials(method).iter().map(run_trial_lenient).collect();
    SuccessGrid::tally(spec, &outcomes)
}

pub fn phase_diagram_tc(spec: &GridSpec, method: Method) -> Result<SuccessGrid> {
    if spec.task != Task::Completion {
        return Err(Error::InvalidConfig("grid is not a completion grid"));
    }
    phase_diagram(spec, method)
}

pub fn phase_diagram_rpca(spec: &GridSpec, method: Method) -> Result<SuccessGrid> {
    if spec.task != Task::Rpca {
        return Err(Error::InvalidConfig("grid is not a robust PCA grid"));
    }
    phase_diagram(spec, method)
}

/// Fixed problem for repeated random initialisations.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityProblem {
    pub truth: Tensor3,
    pub mask: Mask,
    pub rank: usize,
}

impl SensitivityProblem {
    pub fn new(dims: impl Into<Dims>, rank: usize, missing_rate: f64, seed: u64) -> Result<Self> {
        let dims = dims.into();
        let truth = gen_low_tubal_rank(dims, rank, derive_seed(seed, STREAM_TRUTH, 0))?;
        let mask = sample_mask(dims, 1.0 - missing_rate, derive_seed(seed, STREAM_SAMPLE, 0))?;
        Ok(Self { truth, mask, rank })
    }

    /// Seed of the `run`-th initialisation.
    pub fn init_seed(seed: u64, run: usize) -> u64 {
        derive_seed(seed, STREAM_INIT, run as u64)
    }

    /// RSE of one PSTNN completion started from `init_seed`.
    pub fn solve(&self, overrides: &SolverOverrides, init_seed: u64) -> Result<f64> {
        let cfg = overrides.config(Task::Completion, RankTarget::Uniform(self.rank)).with_seed(init_seed);
        let r = solvers::complete(&self.truth, &self.mask, &cfg)?;
        metrics::rse(r.estimate(), &self.truth)
    }
}

/// RSE of `runs` PSTNN completions of one fixed problem, each from a
/// different random initialisation.
pub fn init_sensitivity(
    dims: impl Into<Dims>,
    rank: usize,
    missing_rate: f64,
    runs: usize,
    seed: u64,
    overrides: &SolverOverrides,
) -> Result<Vec<f64>> {
    if runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1"));
    }
    let problem = SensitivityProblem::new(dims, rank, missing_rate, seed)?;
    (0..runs).map(|run| problem.solve(overrides, SensitivityProblem::init_seed(seed, run))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_bounds() {
        assert!(matches!(gen_low_tubal_rank((4, 3, 2), 0, 1), Err(Error::InvalidRank { .. })));
        assert!(matches!(gen_low_tubal_rank((4, 3, 2), 4, 1), Err(Error::InvalidRank { .. })));
        assert_eq!(gen_low_tubal_rank((4, 3, 2), 2, 5).unwrap(), gen_low_tubal_rank((4, 3, 2), 2, 5).unwrap());
    }

    #[test]
    fn mask_counts() {
        assert_eq!(sample_mask((10, 10, 10), 0.5, 3).unwrap().count(), 500);
        assert_eq!(sample_mask((3, 4, 5), 1.0, 3).unwrap().count(), 60);
        assert_ne!(sample_mask((10, 10, 10), 0.5, 1).unwrap(), sample_mask((10, 10, 10), 0.5, 2).unwrap());
        assert!(sample_mask((3, 3, 3), 0.0, 1).is_err());
    }

    #[test]
    fn corruption() {
        let a = gen_low_tubal_rank((6, 5, 4), 2, 9).unwrap();
        let (same, none) = corrupt_sparse(&a, 0.0, NOISE_RANGE, 1).unwrap();
        assert_eq!(same, a);
        assert_eq!(none.count(), 0);
        let (o, hit) = corrupt_sparse(&a, 0.25, NOISE_RANGE, 1).unwrap();
        assert_eq!(hit.count(), 30);
        for p in 0..a.dims().len() {
            if !hit.as_slice()[p] {
                assert_eq!(o.as_slice()[p].to_bits(), a.as_slice()[p].to_bits());
            }
        }
        assert!(corrupt_sparse(&a, 1.0, NOISE_RANGE, 1).is_err());
    }

    #[test]
    fn grid_csv_layout() {
        let g = SuccessGrid { ranks: alloc::vec![1, 2], levels: alloc::vec![0.1, 0.5], cells: alloc::vec![1.0, 0.3, 0.0, 0.5], trials: 10, seed: 0 };
        assert_eq!(g.to_csv("rank"), "rank,0.1,0.5\n1,1,0.3\n2,0,0.5\n");
        assert_eq!(g.get(2, 0.5), Some(0.5));
        assert_eq!(grid_csv("d", &[1], &[0.2], &[-0.0]), "d,0.2\n1,0\n");
    }

    #[test]
    fn trial_enumeration_is_stable() {
        let spec = GridSpec::new(Task::Completion, (5, 5, 3), alloc::vec![1, 2], alloc::vec![0.5, 0.9]);
        let a = spec.trials(Method::Pstnn);
        let b = spec.trials(Method::Tnn);
        assert_eq!(a.len(), 40);
        assert!(a.iter().zip(&b).all(|(x, y)| x.seed == y.seed));
        assert_eq!(a[0].seed, derive_seed(0, 0, 0));
        assert_eq!(a[10].level, 0.9);
    }

    #[test]
    fn grid_validation() {
        let mut spec = GridSpec::new(Task::Rpca, (5, 5, 3), alloc::vec![6], alloc::vec![0.1]);
        assert!(spec.validate().is_err());
        spec.ranks = alloc::vec![2];
        assert!(spec.validate().is_ok());
        spec.levels = alloc::vec![1.0];
        assert!(spec.validate().is_err());
    }
}
