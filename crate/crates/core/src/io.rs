//! File formats for simulation artifacts: trajectory CSV, ensemble CSV,
//! and their JSON metadata sidecars. All writers are byte-deterministic
//! for a given input (stable ordering, shortest round-trip floats).

use std::fmt::Display;

use serde::Serialize;

use crate::ensemble::EnsembleResult;
use crate::kinetics::PropensityMode;
use crate::rng::GENERATOR_ID;
use crate::scalar::Scalar;
use crate::ssa::SimConfig;
use crate::trajectory::Trajectory;

/// `time,<species...>` with one row per recorded point.
pub fn trajectory_csv<F: Scalar, S: Display>(
    trajectory: &Trajectory<F, S>,
    species: &[String],
) -> String {
    let mut out = String::from("time");
    for name in species {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
        out.push_str(&format!("{t}"));
        for value in state {
            out.push_str(&format!(",{value}"));
        }
        out.push('\n');
    }
    out
}

/// Sidecar describing how a trajectory was produced.
#[derive(Debug, Serialize)]
pub struct TrajectoryMeta {
    pub generator: &'static str,
    pub seed: u64,
    pub mode: &'static str,
    pub termination: &'static str,
    pub t_end: f64,
    pub species: Vec<String>,
}

pub fn trajectory_metadata<F: Scalar, S>(
    trajectory: &Trajectory<F, S>,
    config: &SimConfig<F>,
    species: &[String],
) -> String {
    let meta = TrajectoryMeta {
        generator: GENERATOR_ID,
        seed: config.seed,
        mode: config.mode.as_str(),
        termination: trajectory.terminated_by.as_str(),
        t_end: trajectory.t_end.to_f64().unwrap_or(f64::NAN),
        species: species.to_vec(),
    };
    let mut json = serde_json::to_string_pretty(&meta).expect("metadata serialises");
    json.push('\n');
    json
}

/// Deterministic-engine sidecar (no RNG involved).
#[derive(Debug, Serialize)]
pub struct OdeMeta {
    pub method: String,
    pub t_end: f64,
    pub steps: u64,
    pub clamped: u64,
    pub species: Vec<String>,
}

/// Ensemble statistics CSV: per species the columns
/// `<name>_mean,_std,_p05,_p50,_p95`, one row per grid point.
pub fn ensemble_csv<F: Scalar>(result: &EnsembleResult<F>) -> String {
    let mut out = String::from("time");
    for name in &result.species {
        for suffix in ["mean", "std", "p05", "p50", "p95"] {
            out.push_str(&format!(",{name}_{suffix}"));
        }
    }
    out.push('\n');
    for (g, t) in result.grid.iter().enumerate() {
        out.push_str(&format!("{t}"));
        for s in 0..result.species.len() {
            out.push_str(&format!(
                ",{},{},{},{},{}",
                result.mean[g][s], result.std[g][s], result.p05[g][s], result.p50[g][s], result.p95[g][s]
            ));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
pub struct EnsembleMeta {
    pub generator: &'static str,
    pub seed_split: &'static str,
    pub base_seed: u64,
    pub n_runs: u32,
    pub t_end: f64,
    pub mode: &'static str,
    pub max_steps: u64,
    pub grid_points: usize,
    /// One line per auto-resolved parameter.
    pub heuristics: Vec<String>,
    pub seeds: Vec<u64>,
    pub terminations: Vec<&'static str>,
    pub species: Vec<String>,
}

pub fn ensemble_metadata<F: Scalar>(result: &EnsembleResult<F>) -> String {
    let meta = EnsembleMeta {
        generator: GENERATOR_ID,
        seed_split: "seed[i] = splitmix64(base_seed + (i + 1) * golden_gamma)",
        base_seed: result.config.base_seed,
        n_runs: result.n_runs,
        t_end: result.config.t_end.to_f64().unwrap_or(f64::NAN),
        mode: result.config.mode.as_str(),
        max_steps: result.config.max_steps,
        grid_points: result.grid.len(),
        heuristics: result.config.trace.clone(),
        seeds: result.seeds.clone(),
        terminations: result.terminations.iter().map(|t| t.as_str()).collect(),
        species: result.species.clone(),
    };
    let mut json = serde_json::to_string_pretty(&meta).expect("metadata serialises");
    json.push('\n');
    json
}

/// Stoichiometry matrix CSV: `species,<reaction names...>`.
pub fn matrix_csv(matrix: &crate::stoich::StoichiometryMatrix) -> String {
    let mut out = String::from("species");
    for label in &matrix.col_labels {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for i in 0..matrix.n_species() {
        out.push_str(&matrix.row_labels[i]);
        for j in 0..matrix.n_reactions() {
            out.push_str(&format!(",{}", matrix.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn mode_name(mode: PropensityMode) -> &'static str {
    mode.as_str()
}
