//! Acceptance suite: one test per release criterion, each printing a
//! pass line with its runtime. Tolerances and budgets are pinned in
//! code; run with `cargo test -p crn-cli --test acceptance`
//! (`-- --nocapture` to see the lines).

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crn_core::dsl::{emit_dsl, parse_dsl};
use crn_core::ensemble::{run_ensemble, GridSpec, McConfig};
use crn_core::fixtures::{self, load_fixture};
use crn_core::io::ensemble_csv;
use crn_core::kinetics::PropensityMode;
use crn_core::ode::{simulate_ode, OdeConfig};
use crn_core::rng::split_seed;
use crn_core::sbml::{export_sbml, import_sbml_subset};
use crn_core::ssa::{simulate_ssa, SimConfig};
use crn_core::stoich::{build_stoichiometry, weighted_total};
use crn_core::table::{emit_kinetic_table, parse_kinetic_table};
use crn_core::trajectory::{uniform_grid, Record};
use crn_core::validate::validate;
use crn_llm::mock::{MockExchange, MockLlmServer};

fn finish(number: u8, name: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= budget,
        "criterion {number} ({name}) took {elapsed:.2?}, budget {budget:.2?}"
    );
    println!("criterion {number:02} {name}: pass in {elapsed:.2?} (budget {budget:.2?})");
}

fn mc_config(n_runs: u32, grid: GridSpec<f64>, t_end: Option<f64>, seed: u64) -> McConfig<f64> {
    McConfig {
        n_runs: Some(n_runs),
        grid,
        t_end,
        base_seed: seed,
        mode: PropensityMode::PowerLaw,
        max_steps: 100_000_000,
    }
}

#[test]
fn criterion_01_stoichiometry_reproduction() {
    let started = Instant::now();
    let network = load_fixture("mono_enzyme").unwrap();
    let matrix = build_stoichiometry(&network);

    let expected = fixtures::mono_enzyme_matrix_csv();
    let mut lines = expected.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "species");
    assert_eq!(&matrix.col_labels, &header[1..]);
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(matrix.row_labels[i], cells[0]);
        for (j, cell) in cells[1..].iter().enumerate() {
            let expected: i64 = cell.parse().unwrap();
            assert_eq!(
                matrix.get(i, j),
                expected,
                "cell ({}, {})",
                matrix.row_labels[i],
                matrix.col_labels[j]
            );
        }
        rows += 1;
    }
    assert_eq!(rows, matrix.n_species());
    assert_eq!(matrix.n_species(), 8);
    assert_eq!(matrix.n_reactions(), 6);
    finish(1, "stoichiometry reproduction", started, Duration::from_secs(1));
}

#[test]
fn criterion_02_analytic_decay() {
    let started = Instant::now();
    let network = load_fixture("mono_chain").unwrap();
    let n_runs = 500u32;
    let grid: Vec<f64> = vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let result = run_ensemble(
        &network,
        &mc_config(n_runs, GridSpec::Explicit(grid.clone()), Some(3.0), 2024),
    )
    .unwrap();
    for (g, t) in [(2usize, 1.0f64), (6, 3.0)] {
        assert_eq!(result.grid[g], t);
        let expected = 100.0 * (-t).exp();
        let tolerance = 4.0 * result.std[g][0] / (n_runs as f64).sqrt();
        let gap = (result.mean[g][0] - expected).abs();
        assert!(
            gap <= tolerance,
            "SSA mean A({t}) = {} vs {expected} (gap {gap}, tolerance {tolerance})",
            result.mean[g][0]
        );
    }

    let mut ode_config = OdeConfig::fixed(3.0, 1e-3);
    ode_config.record = Record::OnGrid(vec![0.0, 1.0, 2.0, 3.0]);
    let ode = simulate_ode(&network, &ode_config).unwrap();
    for (g, t) in [(1usize, 1.0f64), (3, 3.0)] {
        let expected = 100.0 * (-t).exp();
        let value = ode.trajectory.states[g][0];
        assert!(
            (value - expected).abs() <= 1e-3,
            "ODE A({t}) = {value} vs {expected}"
        );
    }
    finish(2, "analytic decay", started, Duration::from_secs(10));
}

#[test]
fn criterion_03_stochastic_conservation() {
    let started = Instant::now();

    let enzyme = load_fixture("enzyme").unwrap();
    for replicate in 0..100u64 {
        let config = SimConfig {
            t_end: 500.0,
            max_steps: 10_000_000,
            seed: split_seed(31, replicate),
            mode: PropensityMode::PowerLaw,
            record: Record::All,
        };
        let trajectory = simulate_ssa(&enzyme, &config).unwrap();
        for state in &trajectory.states {
            assert_eq!(state[0] + state[2], 100, "E + ES");
            assert_eq!(state[1] + state[2] + state[3], 100, "S + ES + P");
        }
    }

    let oligomers = load_fixture("oligomers").unwrap();
    let weights = [1i64, 1, 2, 3, 4, 5, 6];
    for replicate in 0..100u64 {
        let config = SimConfig {
            t_end: 50.0,
            max_steps: 10_000_000,
            seed: split_seed(32, replicate),
            mode: PropensityMode::PowerLaw,
            record: Record::All,
        };
        let trajectory = simulate_ssa(&oligomers, &config).unwrap();
        for state in &trajectory.states {
            assert_eq!(weighted_total(&weights, state), 2021);
        }
    }
    finish(3, "stochastic conservation", started, Duration::from_secs(30));
}

#[test]
fn criterion_04_misfolding_aggregation_oracle() {
    let started = Instant::now();
    let network = load_fixture("ding2024").unwrap();
    let n_runs = 200u32;
    let grid: Vec<f64> = (0..=100).map(f64::from).collect();
    let result = run_ensemble(
        &network,
        &mc_config(n_runs, GridSpec::Explicit(grid), Some(100.0), 4001),
    )
    .unwrap();
    // M0 is only consumed, first order at k = 0.01: mean 2000 e^{-1}.
    let expected = 2000.0 * (-1.0f64).exp();
    let g = 100;
    assert_eq!(result.grid[g], 100.0);
    let tolerance = 4.0 * result.std[g][0] / (n_runs as f64).sqrt();
    let gap = (result.mean[g][0] - expected).abs();
    assert!(
        gap <= tolerance,
        "mean M0(100) = {} vs {expected} (gap {gap}, tolerance {tolerance})",
        result.mean[g][0]
    );

    // Exact weighted-mass conservation at every event of every replicate.
    let weights = [1i64, 1, 2, 3, 4, 5]; // M0, M1, M2, M3, M4, O
    let p_index = network.species_index("P").unwrap();
    for replicate in 0..n_runs as u64 {
        let config = SimConfig {
            t_end: 100.0,
            max_steps: 10_000_000,
            seed: split_seed(4001, replicate),
            mode: PropensityMode::PowerLaw,
            record: Record::All,
        };
        let trajectory = simulate_ssa(&network, &config).unwrap();
        for state in &trajectory.states {
            assert_eq!(weighted_total(&weights, &state[..6]), 2000);
            assert_eq!(state[p_index], 0, "inactive polymerization fired");
        }
    }
    finish(4, "misfolding-aggregation oracle", started, Duration::from_secs(60));
}

#[test]
fn criterion_05_ssa_ode_agreement_first_order() {
    let started = Instant::now();
    let network = load_fixture("mono_chain").unwrap();
    let n_runs = 500u32;
    let t_end = 30.0;
    let grid = uniform_grid(t_end, 200);
    let result = run_ensemble(
        &network,
        &mc_config(n_runs, GridSpec::Explicit(grid.clone()), Some(t_end), 555),
    )
    .unwrap();

    let mut ode_config = OdeConfig::fixed(t_end, 0.01);
    ode_config.record = Record::OnGrid(grid.clone());
    let ode = simulate_ode(&network, &ode_config).unwrap();

    // Every molecule moves independently through the first-order chain,
    // so each count is Binomial(100, p_s(t)) with p_s taken from the
    // ODE solution; that binomial deviation backs the sample std at
    // cells where no replicate fired.
    let sqrt_n = (n_runs as f64).sqrt();
    let mut worst: f64 = 0.0;
    for (g, t) in grid.iter().enumerate() {
        for s in 0..network.n_species() {
            let ode_value = ode.trajectory.states[g][s];
            let p = (ode_value / 100.0).clamp(0.0, 1.0);
            let binomial_std = (100.0 * p * (1.0 - p)).sqrt();
            let std = result.std[g][s].max(binomial_std);
            let tolerance = 4.0 * std / sqrt_n + 1e-12;
            let gap = (result.mean[g][s] - ode_value).abs();
            worst = worst.max(gap - tolerance);
            assert!(
                gap <= tolerance,
                "cell (t = {t}, {}): mean {} vs ode {ode_value} (gap {gap}, tolerance {tolerance})",
                result.species[s],
                result.mean[g][s]
            );
        }
    }
    assert!(worst <= 0.0);
    finish(5, "SSA/ODE first-order agreement", started, Duration::from_secs(60));
}

#[test]
fn criterion_06_determinism_across_pools_and_runs() {
    let started = Instant::now();
    let network = load_fixture("enzyme").unwrap();

    // Same binary invocation twice: byte-identical trajectory CSVs.
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_crn"))
            .args([
                "simulate-ssa",
                fixture_file("enzyme.dsl").to_str().unwrap(),
                "--t-end",
                "80",
                "--seed",
                "9090",
                "--out",
                out.to_str().unwrap(),
                "--quiet",
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("first.csv"), run("second.csv"));

    // Same ensemble under different worker-pool sizes: bit-identical
    // statistics and bytes.
    let config = mc_config(64, GridSpec::Auto(80), Some(40.0), 606);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_ensemble(&network, &config))
        .unwrap();
    let pooled = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| run_ensemble(&network, &config))
        .unwrap();
    assert_eq!(single, pooled);
    assert_eq!(ensemble_csv(&single), ensemble_csv(&pooled));
    finish(6, "determinism", started, Duration::from_secs(30));
}

#[test]
fn criterion_07_round_trips_on_all_fixtures() {
    let started = Instant::now();
    for name in fixtures::FIXTURE_NAMES {
        let network = load_fixture(name).unwrap();

        let dsl_text = emit_dsl(&network);
        assert_eq!(
            parse_dsl(&dsl_text).unwrap().network,
            network,
            "DSL round trip of `{name}`"
        );

        let table_bytes = emit_kinetic_table(&network);
        assert_eq!(
            parse_kinetic_table(&table_bytes).unwrap().network,
            network,
            "kinetic-table round trip of `{name}`"
        );

        let sbml_bytes = export_sbml(&network);
        assert_eq!(
            import_sbml_subset(&sbml_bytes).unwrap(),
            network,
            "SBML round trip of `{name}`"
        );

        // The two shipped forms agree with each other as well.
        let json_form = parse_kinetic_table(
            fixtures::fixture_table_json(name).unwrap().as_bytes(),
        )
        .unwrap()
        .network;
        assert_eq!(json_form, network, "shipped forms of `{name}` diverge");
    }
    finish(7, "format round trips", started, Duration::from_secs(10));
}

#[test]
fn criterion_08_aggregation_ladder_at_scale() {
    let started = Instant::now();
    let network = load_fixture("aggregation52").unwrap();
    assert_eq!(network.n_species(), 8);
    assert_eq!(network.n_reactions(), 52);
    assert!(validate(&network).is_admissible);

    let matrix = build_stoichiometry(&network);
    assert_eq!(matrix.n_species(), 8);
    assert_eq!(matrix.n_reactions(), 52);

    // Auto-sized window (5 / k_slow, clamped), 10 replicates.
    let config = mc_config(10, GridSpec::Auto(200), None, 808);
    let result = run_ensemble(&network, &config).unwrap();
    assert!(result
        .config
        .trace
        .iter()
        .any(|line| line.starts_with("t_end auto")));

    // Total monomer mass (weights 1..8) holds exactly in every sampled
    // state of every replicate.
    let weights: Vec<i64> = (1..=8).collect();
    let mass = 10000 + (2..=8).sum::<i64>();
    for replicate in 0..10u64 {
        let sim = SimConfig {
            t_end: result.config.t_end,
            max_steps: config.max_steps,
            seed: split_seed(808, replicate),
            mode: PropensityMode::PowerLaw,
            record: Record::OnGrid(result.grid.clone()),
        };
        let trajectory = simulate_ssa(&network, &sim).unwrap();
        for state in &trajectory.states {
            assert_eq!(weighted_total(&weights, state), mass);
        }
    }

    // Event-level check on a shorter window.
    let sim = SimConfig {
        t_end: 2000.0,
        max_steps: 10_000_000,
        seed: split_seed(808, 0),
        mode: PropensityMode::PowerLaw,
        record: Record::All,
    };
    let trajectory = simulate_ssa(&network, &sim).unwrap();
    assert!(trajectory.n_points() > 1000);
    for state in &trajectory.states {
        assert_eq!(weighted_total(&weights, state), mass);
    }
    finish(8, "52-reaction scale", started, Duration::from_secs(300));
}

#[test]
fn criterion_09_pipeline_equivalence_with_mock_endpoint() {
    let started = Instant::now();
    let table_json = fixtures::fixture_table_json("mono_chain").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let prose = dir.path().join("prose.txt");
    std::fs::write(
        &prose,
        "A converts to B at rate 1.0, B to C_mono at rate 0.1, C_mono to D at rate 0.05; \
         100 units of A initially, everything else 0.",
    )
    .unwrap();

    let common = |out_dir: &Path| {
        vec![
            "--out-dir".into(),
            out_dir.to_str().unwrap().to_owned(),
            "--seed".into(),
            "1234".into(),
            "--runs".into(),
            "60".into(),
            "--t-end".into(),
            "10".into(),
            "--grid".into(),
            "41".into(),
            "--quiet".into(),
        ]
    };

    // LLM path through the mock endpoint.
    let server = MockLlmServer::start(vec![MockExchange::new(table_json)]);
    let llm_dir = dir.path().join("via_llm");
    let mut args: Vec<String> = vec!["pipeline".into(), prose.to_str().unwrap().to_owned()];
    args.extend(common(&llm_dir));
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_crn"))
        .args(&args)
        .env("CRN_LLM_BASE_URL", server.base_url())
        .env("CRN_LLM_MODEL", "mock-model")
        .status()
        .unwrap();
    assert!(status.success());

    // Direct path from the same table.
    let direct_dir = dir.path().join("direct");
    let mut args: Vec<String> = vec![
        "pipeline".into(),
        "--from-table".into(),
        fixture_file("mono_chain.json").to_str().unwrap().to_owned(),
    ];
    args.extend(common(&direct_dir));
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_crn"))
        .args(&args)
        .status()
        .unwrap();
    assert!(status.success());

    for artifact in ["kinetic_table.json", "matrix.csv", "ensemble.csv", "model.xml"] {
        let a = std::fs::read(llm_dir.join(artifact)).unwrap();
        let b = std::fs::read(direct_dir.join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} differs between LLM and direct paths");
    }
    assert!(llm_dir.join("transcript.json").exists());

    // Repair loop: dangling species fixed in round two.
    let broken = r#"{
      "species": [{"name": "A", "initial_amount": 100.0}],
      "reactions": [{"name": "decay", "reactants": [{"species": "A", "coefficient": 1}],
                     "products": [{"species": "B", "coefficient": 1}], "rate_constant": 1.0}]
    }"#;
    let fixed = r#"{
      "species": [{"name": "A", "initial_amount": 100.0}, {"name": "B", "initial_amount": 0.0}],
      "reactions": [{"name": "decay", "reactants": [{"species": "A", "coefficient": 1}],
                     "products": [{"species": "B", "coefficient": 1}], "rate_constant": 1.0}]
    }"#;
    let server = MockLlmServer::start(vec![
        MockExchange::new(broken),
        MockExchange::expecting("/reactions/0/products/0/species", fixed),
    ]);
    let transcript_path = dir.path().join("repair_transcript.json");
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_crn"))
        .args([
            "from-text",
            prose.to_str().unwrap(),
            "--transcript",
            transcript_path.to_str().unwrap(),
            "--quiet",
        ])
        .env("CRN_LLM_BASE_URL", server.base_url())
        .env("CRN_LLM_MODEL", "mock-model")
        .output()
        .unwrap();
    assert!(output.status.success());
    let transcript = std::fs::read_to_string(&transcript_path).unwrap();
    assert_eq!(transcript.matches("\"prompt\"").count(), 2, "two rounds");
    assert!(transcript.contains("\"table\""));

    // Zero repair rounds: fails after exactly one round, exit 5.
    let server = MockLlmServer::start(vec![MockExchange::new(broken)]);
    let transcript_path = dir.path().join("failed_transcript.json");
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_crn"))
        .args([
            "from-text",
            prose.to_str().unwrap(),
            "--transcript",
            transcript_path.to_str().unwrap(),
            "--max-repair-rounds",
            "0",
            "--quiet",
        ])
        .env("CRN_LLM_BASE_URL", server.base_url())
        .env("CRN_LLM_MODEL", "mock-model")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(5));
    let transcript = std::fs::read_to_string(&transcript_path).unwrap();
    assert_eq!(transcript.matches("\"prompt\"").count(), 1, "one round");
    finish(9, "pipeline equivalence via mock endpoint", started, Duration::from_secs(60));
}

#[test]
fn criterion_10_ode_convergence_order() {
    let started = Instant::now();
    let network = parse_dsl("species A = 100\ndeath: A -> 0 ; k = 1\n")
        .unwrap()
        .network;
    let analytic = 100.0 * (-1.0f64).exp();
    let step_sizes = [1e-2, 5e-3, 2.5e-3];
    let mut points = Vec::new();
    for &dt in &step_sizes {
        let out = simulate_ode(&network, &OdeConfig::fixed(1.0, dt)).unwrap();
        let error = (out.trajectory.final_state()[0] - analytic).abs();
        assert!(error > 0.0, "error underflow at dt = {dt}");
        points.push((dt.ln(), error.ln()));
    }
    // Least-squares slope of ln(error) against ln(dt).
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum::<f64>()
        / points.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
    assert!(slope >= 3.5, "convergence slope {slope:.3} below 3.5");
    finish(10, "ODE convergence order", started, Duration::from_secs(10));
}

fn fixture_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../core/fixtures/{name}"))
}
