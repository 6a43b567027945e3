//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Duration;

use crn_core::dsl::{parse_dsl, Parsed};
use crn_core::ensemble::{run_ensemble, EnsembleResult, GridSpec, McConfig};
use crn_core::io;
use crn_core::kinetics::PropensityMode;
use crn_core::network::ReactionNetwork;
use crn_core::ode::{simulate_ode, OdeConfig, StepMode};
use crn_core::plot::{emit_plot, PlotData, PlotOptions};
use crn_core::sbml::export_sbml;
use crn_core::ssa::{simulate_ssa, SimConfig};
use crn_core::stoich::build_stoichiometry;
use crn_core::table::{emit_kinetic_table, parse_kinetic_table};
use crn_core::trajectory::{uniform_grid, Record};
use crn_core::validate::{validate, Severity};
use crn_llm::{extract_network, LlmConfig, LlmError};

use crate::pipeline;
use crate::{AutoOr, CliError, CliResult, Command, Reporter};

pub fn run(command: Command, reporter: Reporter) -> CliResult<()> {
    match command {
        Command::Parse { file } => cmd_parse(&file, reporter),
        Command::Validate { file, json } => cmd_validate(&file, json, reporter),
        Command::Matrix { file, csv } => cmd_matrix(&file, csv, reporter),
        Command::SimulateSsa {
            file,
            t_end,
            seed,
            mode,
            max_steps,
            grid,
            out,
        } => cmd_simulate_ssa(&file, t_end, seed, mode, max_steps, grid, out, reporter),
        Command::SimulateOde {
            file,
            t_end,
            dt,
            adaptive,
            rel_tol,
            abs_tol,
            grid,
            record_all,
            out,
        } => cmd_simulate_ode(
            &file, t_end, dt, adaptive, rel_tol, abs_tol, grid, record_all, out, reporter,
        ),
        Command::Ensemble {
            file,
            runs,
            t_end,
            grid,
            seed,
            mode,
            max_steps,
            out_dir,
            svg,
        } => cmd_ensemble(&file, runs, t_end, grid, seed, mode, max_steps, &out_dir, svg, reporter),
        Command::ExportSbml { file, out } => cmd_export_sbml(&file, &out, reporter),
        Command::FromText {
            file,
            transcript,
            base_url,
            model,
            temperature,
            max_repair_rounds,
            timeout_secs,
        } => cmd_from_text(
            &file,
            transcript,
            LlmOverrides {
                base_url,
                model,
                temperature,
                max_repair_rounds,
                timeout_secs,
            },
            reporter,
        ),
        Command::Pipeline {
            prose,
            from_table,
            out_dir,
            seed,
            runs,
            t_end,
            grid,
            mode,
            max_steps,
            base_url,
            model,
            max_repair_rounds,
            timeout_secs,
        } => pipeline::run(pipeline::PipelineArgs {
            prose,
            from_table,
            out_dir,
            seed,
            runs: runs.value(),
            t_end: t_end.value(),
            grid,
            mode,
            max_steps,
            llm: LlmOverrides {
                base_url,
                model,
                temperature: None,
                max_repair_rounds,
                timeout_secs,
            },
            reporter,
        }),
    }
}

/// Flag overrides layered on top of the CRN_LLM_* environment; the
/// config is only materialised when an LLM step actually runs.
pub struct LlmOverrides {
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub max_repair_rounds: Option<u32>,
    pub timeout_secs: Option<u64>,
}

pub fn resolve_llm_config(overrides: &LlmOverrides) -> CliResult<LlmConfig> {
    let mut config = match (&overrides.base_url, &overrides.model) {
        (Some(base_url), Some(model)) => {
            let mut c = LlmConfig::new(base_url.clone(), model.clone());
            c.api_key = std::env::var(crn_llm::ENV_API_KEY).ok();
            c
        }
        _ => {
            let mut c = LlmConfig::from_env()
                .map_err(|e| CliError::Usage(format!("{e} (set CRN_LLM_* or pass --base-url/--model)")))?;
            if let Some(base_url) = &overrides.base_url {
                c.base_url = base_url.clone();
            }
            if let Some(model) = &overrides.model {
                c.model = model.clone();
            }
            c
        }
    };
    if let Some(t) = overrides.temperature {
        config.temperature = t;
    }
    if let Some(r) = overrides.max_repair_rounds {
        config.max_repair_rounds = r;
    }
    if let Some(s) = overrides.timeout_secs {
        config.timeout = Duration::from_secs(s);
    }
    Ok(config)
}

/// Read and parse a network file; `.json` means kinetic table,
/// anything else the DSL.
pub fn load_network(path: &Path, reporter: Reporter) -> CliResult<ReactionNetwork> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let parsed: Parsed = if path.extension().is_some_and(|ext| ext == "json") {
        parse_kinetic_table(&bytes).map_err(|e| CliError::Parse(e.to_string()))?
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|e| CliError::Parse(format!("{} is not UTF-8: {e}", path.display())))?;
        parse_dsl(&text).map_err(|e| CliError::Parse(e.to_string()))?
    };
    for note in &parsed.notes {
        reporter.info(format!("note: {note}"));
    }
    Ok(parsed.network)
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Engine(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Engine(format!("cannot write {}: {e}", path.display())))
}

fn cmd_parse(file: &Path, reporter: Reporter) -> CliResult<()> {
    let network = load_network(file, reporter)?;
    let json = emit_kinetic_table(&network);
    print_bytes(&json)
}

fn cmd_validate(file: &Path, json: bool, reporter: Reporter) -> CliResult<()> {
    let network = load_network(file, reporter)?;
    let report = validate(&network);
    if json {
        println!("{}", report.to_json());
    } else {
        for issue in &report.issues {
            let severity = match issue.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            println!("{:?} {severity:7} {:20} {}", issue.code, issue.subject, issue.message);
        }
        println!(
            "admissible: {}",
            if report.is_admissible { "yes" } else { "no" }
        );
    }
    if report.is_admissible {
        Ok(())
    } else {
        Err(CliError::Parse("network is not admissible".into()))
    }
}

fn cmd_matrix(file: &Path, csv: bool, reporter: Reporter) -> CliResult<()> {
    let network = load_network(file, reporter)?;
    let matrix = build_stoichiometry(&network);
    if csv {
        print!("{}", io::matrix_csv(&matrix));
        return Ok(());
    }
    let name_width = matrix
        .row_labels
        .iter()
        .map(|l| l.len())
        .max()
        .unwrap_or(0)
        .max("species".len());
    let col_widths: Vec<usize> = matrix.col_labels.iter().map(|l| l.len().max(4)).collect();
    print!("{:name_width$}", "species");
    for (label, width) in matrix.col_labels.iter().zip(&col_widths) {
        print!("  {label:>width$}");
    }
    println!();
    for i in 0..matrix.n_species() {
        print!("{:name_width$}", matrix.row_labels[i]);
        for (j, width) in col_widths.iter().enumerate() {
            print!("  {:>width$}", matrix.get(i, j));
        }
        println!();
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate_ssa(
    file: &Path,
    t_end: f64,
    seed: u64,
    mode: PropensityMode,
    max_steps: u64,
    grid: Option<usize>,
    out: Option<PathBuf>,
    reporter: Reporter,
) -> CliResult<()> {
    let network = load_network(file, reporter)?;
    require_admissible(&network)?;
    let config = SimConfig {
        t_end,
        max_steps,
        seed,
        mode,
        record: match grid {
            Some(n) => Record::OnGrid(uniform_grid(t_end, n.max(2))),
            None => Record::All,
        },
    };
    let trajectory = simulate_ssa(&network, &config).map_err(|e| CliError::Engine(e.to_string()))?;
    reporter.debug(format!(
        "{} recorded points, termination: {}",
        trajectory.n_points(),
        trajectory.terminated_by.as_str()
    ));
    let csv = io::trajectory_csv(&trajectory, &network.species_names());
    match out {
        Some(path) => {
            write_file(&path, csv.as_bytes())?;
            let meta = io::trajectory_metadata(&trajectory, &config, &network.species_names());
            write_file(&sidecar_path(&path), meta.as_bytes())?;
            reporter.info(format!("wrote {}", path.display()));
        }
        None => print_bytes(csv.as_bytes())?,
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate_ode(
    file: &Path,
    t_end: f64,
    dt: Option<f64>,
    adaptive: bool,
    rel_tol: f64,
    abs_tol: f64,
    grid: usize,
    record_all: bool,
    out: Option<PathBuf>,
    reporter: Reporter,
) -> CliResult<()> {
    let network = load_network(file, reporter)?;
    require_admissible(&network)?;
    let step = if adaptive {
        StepMode::Adaptive { rel_tol, abs_tol }
    } else {
        StepMode::Fixed {
            dt: dt.unwrap_or_else(|| crn_core::ode::default_dt(&network)),
        }
    };
    let config = OdeConfig {
        t_end,
        step,
        record: if record_all {
            Record::All
        } else {
            Record::OnGrid(uniform_grid(t_end, grid.max(2)))
        },
        clamp_tol: abs_tol,
    };
    let outcome = simulate_ode(&network, &config).map_err(|e| CliError::Engine(e.to_string()))?;
    if outcome.clamped > 0 {
        reporter.info(format!(
            "warning: clamped {} small negative value(s) to zero",
            outcome.clamped
        ));
    }
    reporter.debug(format!("{} accepted steps", outcome.steps));
    let csv = io::trajectory_csv(&outcome.trajectory, &network.species_names());
    match out {
        Some(path) => {
            write_file(&path, csv.as_bytes())?;
            let meta = io::OdeMeta {
                method: if adaptive { "rkf45".into() } else { "rk4".into() },
                t_end,
                steps: outcome.steps,
                clamped: outcome.clamped,
                species: network.species_names(),
            };
            let mut meta_json = serde_json::to_string_pretty(&meta)
                .map_err(|e| CliError::Engine(e.to_string()))?;
            meta_json.push('\n');
            write_file(&sidecar_path(&path), meta_json.as_bytes())?;
            reporter.info(format!("wrote {}", path.display()));
        }
        None => print_bytes(csv.as_bytes())?,
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_ensemble(
    file: &Path,
    runs: AutoOr<u32>,
    t_end: AutoOr<f64>,
    grid: usize,
    seed: u64,
    mode: PropensityMode,
    max_steps: u64,
    out_dir: &Path,
    svg: bool,
    reporter: Reporter,
) -> CliResult<()> {
    let network = load_network(file, reporter)?;
    require_admissible(&network)?;
    let config = McConfig {
        n_runs: runs.value(),
        grid: GridSpec::Auto(grid.max(2)),
        t_end: t_end.value(),
        base_seed: seed,
        mode,
        max_steps,
    };
    let result = run_ensemble(&network, &config).map_err(engine_error)?;
    write_ensemble_artifacts(&result, out_dir, svg, reporter)?;
    Ok(())
}

pub fn write_ensemble_artifacts(
    result: &EnsembleResult<f64>,
    out_dir: &Path,
    svg: bool,
    reporter: Reporter,
) -> CliResult<Vec<(String, String)>> {
    let mut artifacts = Vec::new();
    let csv_path = out_dir.join("ensemble.csv");
    write_file(&csv_path, io::ensemble_csv(result).as_bytes())?;
    artifacts.push(("ensemble_csv".to_owned(), "ensemble.csv".to_owned()));
    let meta_path = out_dir.join("ensemble_meta.json");
    write_file(&meta_path, io::ensemble_metadata(result).as_bytes())?;
    artifacts.push(("ensemble_meta".to_owned(), "ensemble_meta.json".to_owned()));
    reporter.info(format!(
        "wrote {} ({} replicates, {} grid points)",
        csv_path.display(),
        result.n_runs,
        result.grid.len()
    ));
    if svg {
        let data = PlotData::from_ensemble(result);
        let overview = emit_plot(&data, &PlotOptions::default()).map_err(engine_error)?;
        write_file(&out_dir.join("plot_all_species.svg"), &overview)?;
        artifacts.push(("plot_overview".to_owned(), "plot_all_species.svg".to_owned()));
        for name in &result.species {
            let single = data.clone().select(std::slice::from_ref(name)).map_err(engine_error)?;
            let bytes = emit_plot(
                &single,
                &PlotOptions {
                    title: Some(name.clone()),
                    ..PlotOptions::default()
                },
            )
            .map_err(engine_error)?;
            let file_name = format!("plot_{name}.svg");
            write_file(&out_dir.join(&file_name), &bytes)?;
            artifacts.push((format!("plot_{name}"), file_name));
        }
    }
    Ok(artifacts)
}

fn cmd_export_sbml(file: &Path, out: &Path, reporter: Reporter) -> CliResult<()> {
    let network = load_network(file, reporter)?;
    require_admissible(&network)?;
    write_file(out, &export_sbml(&network))?;
    reporter.info(format!("wrote {}", out.display()));
    Ok(())
}

fn cmd_from_text(
    file: &Path,
    transcript_out: Option<PathBuf>,
    overrides: LlmOverrides,
    reporter: Reporter,
) -> CliResult<()> {
    let description = std::fs::read_to_string(file)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", file.display())))?;
    let config = resolve_llm_config(&overrides)?;
    match extract_network(&description, &config) {
        Ok((network, transcript)) => {
            if let Some(path) = transcript_out {
                write_file(&path, transcript.to_json().as_bytes())?;
                reporter.info(format!("wrote {}", path.display()));
            }
            print_bytes(&emit_kinetic_table(&network))
        }
        Err(error) => {
            if let (Some(path), Some(transcript)) = (&transcript_out, error.transcript()) {
                write_file(path, transcript.to_json().as_bytes())?;
                reporter.info(format!("wrote {}", path.display()));
            }
            Err(endpoint_error(error))
        }
    }
}

pub fn require_admissible(network: &ReactionNetwork) -> CliResult<()> {
    let report = validate(network);
    if report.is_admissible {
        Ok(())
    } else {
        let first = report
            .errors()
            .next()
            .map(|i| i.message.clone())
            .unwrap_or_default();
        Err(CliError::Parse(format!(
            "network is not admissible ({first}); run `crn validate` for the full report"
        )))
    }
}

pub fn engine_error(e: impl std::fmt::Display) -> CliError {
    CliError::Engine(e.to_string())
}

pub fn endpoint_error(e: LlmError) -> CliError {
    match e {
        LlmError::Config(message) => CliError::Usage(message),
        other => CliError::Endpoint(other.to_string()),
    }
}


fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

/// Write to stdout without panicking on a closed pipe.
fn print_bytes(bytes: &[u8]) -> CliResult<()> {
    use std::io::Write;
    std::io::stdout()
        .write_all(bytes)
        .map_err(|e| CliError::Engine(format!("stdout: {e}")))
}
