//! Built-in model fixtures used across tests, benchmarks, and examples.
//!
//! Each fixture ships in both input formats (DSL and kinetic-table
//! JSON, asserted equivalent by tests) under `crates/core/fixtures/`;
//! `fixtures/constants.json` pins every rate constant and initial
//! amount the files are expected to carry.

use thiserror::Error;

use crate::dsl::parse_dsl;
use crate::network::ReactionNetwork;

#[derive(Debug, Error, PartialEq)]
#[error("unknown fixture `{0}` (available: {names})", names = FIXTURE_NAMES.join(", "))]
pub struct UnknownFixture(pub String);

pub const FIXTURE_NAMES: [&str; 6] = [
    "mono_chain",
    "enzyme",
    "mono_enzyme",
    "ding2024",
    "oligomers",
    "aggregation52",
];

/// DSL source of a fixture.
pub fn fixture_dsl(name: &str) -> Result<&'static str, UnknownFixture> {
    match name {
        "mono_chain" => Ok(include_str!("../fixtures/mono_chain.dsl")),
        "enzyme" => Ok(include_str!("../fixtures/enzyme.dsl")),
        "mono_enzyme" => Ok(include_str!("../fixtures/mono_enzyme.dsl")),
        "ding2024" => Ok(include_str!("../fixtures/ding2024.dsl")),
        "oligomers" => Ok(include_str!("../fixtures/oligomers.dsl")),
        "aggregation52" => Ok(include_str!("../fixtures/aggregation52.dsl")),
        other => Err(UnknownFixture(other.to_owned())),
    }
}

/// Kinetic-table JSON form of a fixture.
pub fn fixture_table_json(name: &str) -> Result<&'static str, UnknownFixture> {
    match name {
        "mono_chain" => Ok(include_str!("../fixtures/mono_chain.json")),
        "enzyme" => Ok(include_str!("../fixtures/enzyme.json")),
        "mono_enzyme" => Ok(include_str!("../fixtures/mono_enzyme.json")),
        "ding2024" => Ok(include_str!("../fixtures/ding2024.json")),
        "oligomers" => Ok(include_str!("../fixtures/oligomers.json")),
        "aggregation52" => Ok(include_str!("../fixtures/aggregation52.json")),
        other => Err(UnknownFixture(other.to_owned())),
    }
}

/// Expected stoichiometry matrix of the `mono_enzyme` fixture, in the
/// same CSV layout the `matrix` command emits.
pub fn mono_enzyme_matrix_csv() -> &'static str {
    include_str!("../fixtures/mono_enzyme.matrix.csv")
}

/// The constants manifest pinning all fixture parameters.
pub fn constants_manifest() -> &'static str {
    include_str!("../fixtures/constants.json")
}

/// Parse a fixture into its canonical network.
pub fn load_fixture(name: &str) -> Result<ReactionNetwork, UnknownFixture> {
    let text = fixture_dsl(name)?;
    Ok(parse_dsl(text)
        .unwrap_or_else(|e| panic!("fixture `{name}` must parse: {e}"))
        .network)
}
