//! Cross-format integration: plots are views of the exported CSV data,
//! conservation analysis of the shipped fixtures, and a smoke check
//! that the engines instantiate at `f32`.

use crn_core::ensemble::{run_ensemble, GridSpec, McConfig};
use crn_core::fixtures::load_fixture;
use crn_core::io::ensemble_csv;
use crn_core::kinetics::PropensityMode;
use crn_core::ode::{simulate_ode, OdeConfig};
use crn_core::plot::{emit_plot, polyline_points, PlotData, PlotOptions};
use crn_core::ssa::{simulate_ssa, SimConfig};
use crn_core::stoich::{build_stoichiometry, conservation_vectors};
use crn_core::trajectory::Record;

#[test]
fn ensemble_plot_polyline_equals_the_csv_mean_column() {
    let network = load_fixture("ding2024").unwrap();
    let config = McConfig {
        n_runs: Some(30),
        grid: GridSpec::Auto(40),
        t_end: Some(100.0),
        base_seed: 12,
        mode: PropensityMode::PowerLaw,
        max_steps: 10_000_000,
    };
    let result = run_ensemble(&network, &config).unwrap();

    let data = PlotData::from_ensemble(&result)
        .select(&["M0".to_owned()])
        .unwrap();
    let svg = emit_plot(&data, &PlotOptions::default()).unwrap();
    let plotted = polyline_points(&svg, "M0").unwrap();

    // Independently re-read the mean column from the CSV text.
    let csv = ensemble_csv(&result);
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let column = header.iter().position(|h| *h == "M0_mean").unwrap();
    let from_csv: Vec<(f64, f64)> = lines
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            (cells[0].parse().unwrap(), cells[column].parse().unwrap())
        })
        .collect();
    assert_eq!(plotted, from_csv);

    // And the decay is visible: monotone non-increasing M0 mean.
    assert!(plotted.windows(2).all(|w| w[1].1 <= w[0].1));
}

#[test]
fn enzyme_fixture_has_the_enzyme_conservation_weight() {
    let network = load_fixture("enzyme").unwrap();
    let basis = conservation_vectors(&build_stoichiometry(&network));
    assert_eq!(basis.len(), 2);
    // E + ES falls straight out of the elimination.
    assert!(basis.contains(&vec![1, 0, 1, 0]), "basis: {basis:?}");
}

#[test]
fn engines_run_at_f32() {
    let network = load_fixture("mono_chain").unwrap();
    let ssa = SimConfig::<f32>::new(5.0, 3);
    let trajectory = simulate_ssa(&network, &ssa).unwrap();
    assert!(trajectory.n_points() > 10);

    let ode = OdeConfig::<f32>::fixed(1.0, 1e-3);
    let out = simulate_ode(&network, &ode).unwrap();
    let expected = 100.0f32 * (-1.0f32).exp();
    assert!((out.trajectory.final_state()[0] - expected).abs() < 0.05);

    let config = McConfig::<f32> {
        n_runs: Some(8),
        grid: GridSpec::Auto(10),
        t_end: Some(5.0),
        base_seed: 4,
        mode: PropensityMode::PowerLaw,
        max_steps: 100_000,
    };
    let result = run_ensemble(&network, &config).unwrap();
    assert_eq!(result.mean.len(), 10);
}

#[test]
fn ode_trajectory_plot_lines_follow_chain_topology() {
    let network = load_fixture("mono_chain").unwrap();
    let mut config = OdeConfig::with_default_dt(&network, 60.0);
    config.record = Record::uniform_grid(60.0, 61);
    let out = simulate_ode(&network, &config).unwrap();
    let data = PlotData::from_dense(&out.trajectory, &network.species_names());
    let svg = emit_plot(&data, &PlotOptions::default()).unwrap();
    let a = polyline_points(&svg, "A").unwrap();
    let d = polyline_points(&svg, "D").unwrap();
    assert!(a.windows(2).all(|w| w[1].1 <= w[0].1), "A decreases");
    assert!(d.windows(2).all(|w| w[1].1 >= w[0].1), "D increases");
}
