//! The end-to-end `pipeline` command: description (or reaction file)
//! in, a self-describing artifact directory out.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crn_core::ensemble::{run_ensemble, GridSpec, McConfig};
use crn_core::io;
use crn_core::kinetics::PropensityMode;
use crn_core::network::ReactionNetwork;
use crn_core::rng::GENERATOR_ID;
use crn_core::sbml::export_sbml;
use crn_core::stoich::build_stoichiometry;
use crn_core::table::emit_kinetic_table;
use crn_core::validate::validate;
use crn_llm::extract_network;

use crate::commands::{
    endpoint_error, engine_error, load_network, resolve_llm_config, write_ensemble_artifacts,
    LlmOverrides,
};
use crate::{CliError, CliResult, Reporter};

pub struct PipelineArgs {
    pub prose: Option<PathBuf>,
    pub from_table: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub runs: Option<u32>,
    pub t_end: Option<f64>,
    pub grid: usize,
    pub mode: PropensityMode,
    pub max_steps: u64,
    pub llm: LlmOverrides,
    pub reporter: Reporter,
}

#[derive(Serialize)]
struct ManifestSource {
    kind: &'static str,
    path: String,
}

#[derive(Serialize)]
struct ManifestLlm {
    base_url: String,
    model: String,
    max_repair_rounds: u32,
    rounds_used: usize,
}

#[derive(Serialize)]
struct ManifestConfig {
    seed: u64,
    n_runs: u32,
    t_end: f64,
    grid_points: usize,
    mode: &'static str,
    max_steps: u64,
    heuristics: Vec<String>,
}

/// Everything needed to regenerate the run: inputs, resolved config
/// (seeds included), and the artifact map.
#[derive(Serialize)]
struct Manifest {
    tool: String,
    generator: &'static str,
    source: ManifestSource,
    llm: Option<ManifestLlm>,
    config: ManifestConfig,
    artifacts: Vec<(String, String)>,
}

pub fn run(args: PipelineArgs) -> CliResult<()> {
    let reporter = args.reporter;
    let out_dir = &args.out_dir;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Engine(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut artifacts: Vec<(String, String)> = Vec::new();
    let (network, source, llm_info) = acquire_network(&args, &mut artifacts)?;

    // Canonical kinetic table, whatever the input path was.
    write(out_dir, "kinetic_table.json", &emit_kinetic_table(&network))?;
    artifacts.push(("kinetic_table".into(), "kinetic_table.json".into()));

    let report = validate(&network);
    write(out_dir, "validation.json", report.to_json().as_bytes())?;
    artifacts.push(("validation".into(), "validation.json".into()));
    if !report.is_admissible {
        return Err(CliError::Parse(format!(
            "extracted network is not admissible; see {}",
            out_dir.join("validation.json").display()
        )));
    }
    for warning in report.warnings() {
        reporter.info(format!("warning: {}", warning.message));
    }

    let matrix = build_stoichiometry(&network);
    write(out_dir, "matrix.csv", io::matrix_csv(&matrix).as_bytes())?;
    artifacts.push(("matrix".into(), "matrix.csv".into()));
    reporter.debug(format!(
        "stoichiometry matrix: {} species x {} reactions",
        matrix.n_species(),
        matrix.n_reactions()
    ));

    let config = McConfig {
        n_runs: args.runs,
        grid: GridSpec::Auto(args.grid.max(2)),
        t_end: args.t_end,
        base_seed: args.seed,
        mode: args.mode,
        max_steps: args.max_steps,
    };
    let ensemble = run_ensemble(&network, &config).map_err(engine_error)?;
    artifacts.extend(write_ensemble_artifacts(&ensemble, out_dir, true, reporter)?);

    write(out_dir, "model.xml", &export_sbml(&network))?;
    artifacts.push(("sbml".into(), "model.xml".into()));

    let manifest = Manifest {
        tool: format!("crn {}", env!("CARGO_PKG_VERSION")),
        generator: GENERATOR_ID,
        source,
        llm: llm_info,
        config: ManifestConfig {
            seed: args.seed,
            n_runs: ensemble.n_runs,
            t_end: ensemble.config.t_end,
            grid_points: ensemble.grid.len(),
            mode: args.mode.as_str(),
            max_steps: args.max_steps,
            heuristics: ensemble.config.trace.clone(),
        },
        artifacts,
    };
    let mut manifest_json =
        serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Engine(e.to_string()))?;
    manifest_json.push('\n');
    write(out_dir, "manifest.json", manifest_json.as_bytes())?;
    reporter.info(format!("pipeline complete: {}", out_dir.display()));
    Ok(())
}

fn acquire_network(
    args: &PipelineArgs,
    artifacts: &mut Vec<(String, String)>,
) -> CliResult<(ReactionNetwork, ManifestSource, Option<ManifestLlm>)> {
    if let Some(table) = &args.from_table {
        let network = load_network(table, args.reporter)?;
        return Ok((
            network,
            ManifestSource {
                kind: "table",
                path: table.display().to_string(),
            },
            None,
        ));
    }
    let Some(prose) = &args.prose else {
        return Err(CliError::Usage(
            "pipeline needs a prose file or --from-table <file>".into(),
        ));
    };
    let description = std::fs::read_to_string(prose)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", prose.display())))?;
    let config = resolve_llm_config(&args.llm)?;
    args.reporter
        .info(format!("extracting network via {}", config.base_url));
    match extract_network(&description, &config) {
        Ok((network, transcript)) => {
            write(&args.out_dir, "transcript.json", transcript.to_json().as_bytes())?;
            artifacts.push(("transcript".into(), "transcript.json".into()));
            let rounds_used = transcript.rounds.len();
            Ok((
                network,
                ManifestSource {
                    kind: "prose",
                    path: prose.display().to_string(),
                },
                Some(ManifestLlm {
                    base_url: config.base_url,
                    model: config.model,
                    max_repair_rounds: config.max_repair_rounds,
                    rounds_used,
                }),
            ))
        }
        Err(error) => {
            if let Some(transcript) = error.transcript() {
                write(&args.out_dir, "transcript.json", transcript.to_json().as_bytes())?;
            }
            Err(endpoint_error(error))
        }
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, bytes)
        .map_err(|e| CliError::Engine(format!("cannot write {}: {e}", path.display())))
}
