//! Gillespie direct-method stochastic simulation.
//!
//! One trajectory per call: draw an exponential waiting time from the
//! total propensity, pick the firing reaction by cumulative sum, apply
//! its stoichiometry column, repeat. Identical `(network, config)`
//! including the seed gives a bit-identical trajectory.

use thiserror::Error;

use crate::kinetics::{term_product, PropensityMode};
use crate::network::ReactionNetwork;
use crate::rng::SimRng;
use crate::scalar::Scalar;
use crate::stoich::build_stoichiometry;
use crate::trajectory::{Record, Termination, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<F> {
    pub t_end: F,
    /// Cap on the number of reaction events.
    pub max_steps: u64,
    pub seed: u64,
    pub mode: PropensityMode,
    pub record: Record<F>,
}

impl<F: Scalar> SimConfig<F> {
    pub fn new(t_end: F, seed: u64) -> Self {
        Self {
            t_end,
            max_steps: 100_000_000,
            seed,
            mode: PropensityMode::default(),
            record: Record::All,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SsaError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

/// Precomputed per-reaction data: rate constant in working precision,
/// reactant terms, and the sparse stoichiometry column.
struct Compiled<F> {
    rate: F,
    reactants: Vec<crate::network::ReactionTerm>,
    deltas: Vec<(usize, i64)>,
}

fn compile<F: Scalar>(network: &ReactionNetwork) -> Vec<Compiled<F>> {
    let matrix = build_stoichiometry(network);
    network
        .reactions
        .iter()
        .enumerate()
        .map(|(j, r)| Compiled {
            rate: F::from_f64_lossy(r.rate_constant),
            reactants: r.reactants.clone(),
            deltas: matrix.column_deltas(j),
        })
        .collect()
}

fn check_config<F: Scalar>(config: &SimConfig<F>) -> Result<(), SsaError> {
    if !(config.t_end > F::zero()) {
        return Err(SsaError::InvalidConfig("t_end must be positive".into()));
    }
    if config.max_steps == 0 {
        return Err(SsaError::InvalidConfig("max_steps must be at least 1".into()));
    }
    if let Record::OnGrid(grid) = &config.record {
        if grid.is_empty() || grid[0] != F::zero() {
            return Err(SsaError::InvalidConfig(
                "recording grid must start at 0".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SsaError::InvalidConfig(
                "recording grid must be strictly ascending".into(),
            ));
        }
        if *grid.last().unwrap() > config.t_end {
            return Err(SsaError::InvalidConfig(
                "recording grid exceeds t_end".into(),
            ));
        }
    }
    Ok(())
}

/// Simulate one trajectory of an admissible network. Initial amounts
/// are floored to integer counts.
pub fn simulate_ssa<F: Scalar>(
    network: &ReactionNetwork,
    config: &SimConfig<F>,
) -> Result<Trajectory<F, i64>, SsaError> {
    check_config(config)?;
    let reactions = compile::<F>(network);
    let mut rng = SimRng::new(config.seed);

    let mut state = network.initial_counts();
    let mut state_f: Vec<F> = state.iter().map(|&c| F::from_count(c)).collect();
    let mut t = F::zero();

    let mut times = Vec::new();
    let mut states: Vec<Vec<i64>> = Vec::new();
    let grid: &[F] = match &config.record {
        Record::All => &[],
        Record::OnGrid(g) => g,
    };
    let mut next_grid = 0usize;
    if matches!(config.record, Record::All) {
        times.push(t);
        states.push(state.clone());
    }

    let mut propensities: Vec<F> = vec![F::zero(); reactions.len()];
    let mut steps = 0u64;
    let terminated_by = loop {
        if steps >= config.max_steps {
            break Termination::StepCap;
        }

        let mut total = F::zero();
        for (p, r) in propensities.iter_mut().zip(&reactions) {
            *p = r.rate * term_product(&r.reactants, &state_f, config.mode);
            total = total + *p;
        }
        if !(total > F::zero()) {
            break Termination::Exhausted;
        }

        let u1 = F::from_f64_lossy(rng.unit_positive());
        let tau = -u1.ln() / total;
        let t_next = t + tau;
        if t_next > config.t_end {
            break Termination::TEnd;
        }

        // Grid points strictly before the event hold the pre-event state.
        while next_grid < grid.len() && grid[next_grid] < t_next {
            times.push(grid[next_grid]);
            states.push(state.clone());
            next_grid += 1;
        }

        // Categorical choice: first reaction whose cumulative propensity
        // exceeds u2 * total.
        let target = F::from_f64_lossy(rng.unit()) * total;
        let mut cumulative = F::zero();
        let mut chosen = None;
        for (j, &p) in propensities.iter().enumerate() {
            cumulative = cumulative + p;
            if target < cumulative {
                chosen = Some(j);
                break;
            }
        }
        // Rounding in the cumulative sum can leave the target unclaimed;
        // fall back to the last fireable reaction.
        let chosen = chosen.unwrap_or_else(|| {
            propensities
                .iter()
                .rposition(|&p| p > F::zero())
                .expect("total propensity was positive")
        });

        for &(i, delta) in &reactions[chosen].deltas {
            state[i] += delta;
            debug_assert!(state[i] >= 0, "population went negative");
            state_f[i] = F::from_count(state[i]);
        }
        t = t_next;
        steps += 1;

        if matches!(config.record, Record::All) {
            times.push(t);
            states.push(state.clone());
        }
    };

    // Remaining grid points hold the final state.
    while next_grid < grid.len() {
        times.push(grid[next_grid]);
        states.push(state.clone());
        next_grid += 1;
    }

    Ok(Trajectory {
        times,
        states,
        terminated_by,
        t_end: config.t_end,
    })
}
