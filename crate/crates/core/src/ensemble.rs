//! Monte Carlo ensembling of stochastic replicates.
//!
//! Replicates are independent SSA runs on per-replicate seed streams,
//! sampled on a common grid and reduced to per-cell statistics. The
//! reduction iterates replicates in index order, so results are
//! bit-identical no matter how many worker threads execute the runs.

use rayon::prelude::*;
use thiserror::Error;

use crate::kinetics::{reaction_rate, PropensityMode};
use crate::network::ReactionNetwork;
use crate::rng::split_seed;
use crate::scalar::Scalar;
use crate::ssa::{simulate_ssa, SimConfig, SsaError};
use crate::trajectory::{uniform_grid, Record, Termination};

/// Time grid request: `Auto(n)` spreads `n` points over `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec<F> {
    Auto(usize),
    Explicit(Vec<F>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig<F> {
    /// `None` resolves to 100 replicates.
    pub n_runs: Option<u32>,
    pub grid: GridSpec<F>,
    /// `None` resolves to `5 / k_slow` (see [`resolve`]).
    pub t_end: Option<F>,
    pub base_seed: u64,
    pub mode: PropensityMode,
    pub max_steps: u64,
}

impl<F: Scalar> McConfig<F> {
    pub fn auto(base_seed: u64) -> Self {
        Self {
            n_runs: None,
            grid: GridSpec::Auto(200),
            t_end: None,
            base_seed,
            mode: PropensityMode::default(),
            max_steps: 100_000_000,
        }
    }
}

/// Fully determined run parameters, echoed into results and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedMcConfig<F> {
    pub n_runs: u32,
    pub grid: Vec<F>,
    pub t_end: F,
    pub base_seed: u64,
    pub mode: PropensityMode,
    pub max_steps: u64,
    /// How each auto parameter was decided, one line per decision.
    pub trace: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum McError {
    #[error(
        "cannot auto-size the time window: no reaction has a positive rate at the initial state"
    )]
    AllRatesZero,
    #[error("invalid ensemble config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ssa(#[from] SsaError),
}

const T_END_MIN: f64 = 1.0;
const T_END_MAX: f64 = 1e6;

/// Resolve auto parameters against the network. Explicit values pass
/// through unchanged.
///
/// The auto time window is `5 / k_slow`, clamped to `[1, 1e6]`, where
/// `k_slow` is the smallest nonzero reaction rate evaluated at the
/// initial counts with zero counts lifted to one. The lift lets
/// downstream reactions whose inputs are not yet populated still
/// contribute the timescale they will run at once fed.
pub fn resolve<F: Scalar>(
    network: &ReactionNetwork,
    config: &McConfig<F>,
) -> Result<ResolvedMcConfig<F>, McError> {
    let mut trace = Vec::new();

    let t_end = match config.t_end {
        Some(t) => {
            if !(t > F::zero()) {
                return Err(McError::InvalidConfig("t_end must be positive".into()));
            }
            t
        }
        None => {
            let lifted: Vec<F> = network
                .initial_counts()
                .iter()
                .map(|&c| F::from_count(c.max(1)))
                .collect();
            let k_slow = (0..network.n_reactions())
                .map(|j| reaction_rate(network, j, &lifted, config.mode))
                .filter(|&r| r > F::zero())
                .fold(None, |acc: Option<F>, r| {
                    Some(acc.map_or(r, |a| a.min(r)))
                })
                .ok_or(McError::AllRatesZero)?;
            let raw = 5.0 / k_slow.to_f64().unwrap_or(f64::INFINITY);
            let clamped = raw.clamp(T_END_MIN, T_END_MAX);
            trace.push(format!(
                "t_end auto: 5 / k_slow = 5 / {} = {raw}, clamped to {clamped}",
                k_slow
            ));
            F::from_f64_lossy(clamped)
        }
    };

    let n_runs = match config.n_runs {
        Some(0) => return Err(McError::InvalidConfig("n_runs must be at least 1".into())),
        Some(n) => n,
        None => {
            trace.push("n_runs auto: 100".into());
            100
        }
    };

    let grid = match &config.grid {
        GridSpec::Explicit(grid) => {
            if grid.is_empty() || grid[0] != F::zero() {
                return Err(McError::InvalidConfig("grid must start at 0".into()));
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(McError::InvalidConfig("grid must be strictly ascending".into()));
            }
            if *grid.last().unwrap() > t_end {
                return Err(McError::InvalidConfig(
                    "grid exceeds t_end; pass t_end explicitly".into(),
                ));
            }
            grid.clone()
        }
        GridSpec::Auto(n) => {
            if *n < 2 {
                return Err(McError::InvalidConfig("auto grid needs at least 2 points".into()));
            }
            trace.push(format!("grid auto: {n} uniform points on [0, {t_end}]"));
            uniform_grid(t_end, *n)
        }
    };

    Ok(ResolvedMcConfig {
        n_runs,
        grid,
        t_end,
        base_seed: config.base_seed,
        mode: config.mode,
        max_steps: config.max_steps,
        trace,
    })
}

/// Ensemble statistics over a fixed grid; matrices are grid x species.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult<F> {
    pub species: Vec<String>,
    pub grid: Vec<F>,
    pub mean: Vec<Vec<F>>,
    pub std: Vec<Vec<F>>,
    pub p05: Vec<Vec<F>>,
    pub p50: Vec<Vec<F>>,
    pub p95: Vec<Vec<F>>,
    pub n_runs: u32,
    pub seeds: Vec<u64>,
    pub terminations: Vec<Termination>,
    pub config: ResolvedMcConfig<F>,
}

/// Run the ensemble described by `config` (auto fields resolved here).
pub fn run_ensemble<F: Scalar>(
    network: &ReactionNetwork,
    config: &McConfig<F>,
) -> Result<EnsembleResult<F>, McError> {
    let resolved = resolve(network, config)?;
    run_resolved(network, resolved)
}

/// Run with fully resolved parameters.
pub fn run_resolved<F: Scalar>(
    network: &ReactionNetwork,
    resolved: ResolvedMcConfig<F>,
) -> Result<EnsembleResult<F>, McError> {
    let seeds: Vec<u64> = (0..resolved.n_runs)
        .map(|r| split_seed(resolved.base_seed, r as u64))
        .collect();

    let replicates: Vec<(Vec<Vec<i64>>, Termination)> = seeds
        .par_iter()
        .map(|&seed| {
            let sim = SimConfig {
                t_end: resolved.t_end,
                max_steps: resolved.max_steps,
                seed,
                mode: resolved.mode,
                record: Record::OnGrid(resolved.grid.clone()),
            };
            simulate_ssa(network, &sim).map(|t| (t.states, t.terminated_by))
        })
        .collect::<Result<_, _>>()?;

    let n_grid = resolved.grid.len();
    let n_species = network.n_species();
    let n = replicates.len();
    let mut mean = vec![vec![F::zero(); n_species]; n_grid];
    let mut std = vec![vec![F::zero(); n_species]; n_grid];
    let mut p05 = vec![vec![F::zero(); n_species]; n_grid];
    let mut p50 = vec![vec![F::zero(); n_species]; n_grid];
    let mut p95 = vec![vec![F::zero(); n_species]; n_grid];

    let mut values: Vec<F> = vec![F::zero(); n];
    for g in 0..n_grid {
        for s in 0..n_species {
            for (r, (states, _)) in replicates.iter().enumerate() {
                values[r] = F::from_count(states[g][s]);
            }
            let total: F = values.iter().copied().sum();
            let m = total / F::from_count(n as i64);
            mean[g][s] = m;
            std[g][s] = if n > 1 {
                let ss: F = values.iter().map(|&v| (v - m) * (v - m)).sum();
                (ss / F::from_count(n as i64 - 1)).sqrt()
            } else {
                F::zero()
            };
            values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("counts are ordered"));
            p05[g][s] = percentile(&values, 0.05);
            p50[g][s] = percentile(&values, 0.50);
            p95[g][s] = percentile(&values, 0.95);
        }
    }

    Ok(EnsembleResult {
        species: network.species_names(),
        grid: resolved.grid.clone(),
        mean,
        std,
        p05,
        p50,
        p95,
        n_runs: resolved.n_runs,
        seeds,
        terminations: replicates.into_iter().map(|(_, t)| t).collect(),
        config: resolved,
    })
}

/// Linear interpolation between closest ranks on sorted values.
fn percentile<F: Scalar>(sorted: &[F], q: f64) -> F {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 || lo + 1 >= n {
        sorted[lo]
    } else {
        sorted[lo] * F::from_f64_lossy(1.0 - frac) + sorted[lo + 1] * F::from_f64_lossy(frac)
    }
}
