//! Kinetic-table JSON: the structured interchange format.
//!
//! This is the lossless peer of the DSL and the exact contract the LLM
//! bridge asks models to fill. The schema is published in
//! `docs/kinetic_table.schema.json`. Parsing walks the JSON value
//! manually so every structural or semantic problem is reported with a
//! JSON-pointer path.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::dsl::Parsed;
use crate::network::{
    is_valid_identifier, merge_terms, Reaction, ReactionNetwork, ReactionTerm, Species,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticTable {
    pub species: Vec<TableSpecies>,
    pub reactions: Vec<TableReaction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSpecies {
    pub name: String,
    pub initial_amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReaction {
    pub name: String,
    pub reactants: Vec<TableTerm>,
    pub products: Vec<TableTerm>,
    pub rate_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableTerm {
    pub species: String,
    pub coefficient: i64,
}

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("kinetic table is not well-formed JSON: {0}")]
    Json(String),
    #[error("kinetic table schema violation at {pointer}: {reason}")]
    Schema { pointer: String, reason: String },
}

impl TableError {
    fn schema(pointer: impl Into<String>, reason: impl Into<String>) -> Self {
        TableError::Schema {
            pointer: pointer.into(),
            reason: reason.into(),
        }
    }
}

impl KineticTable {
    pub fn from_network(network: &ReactionNetwork) -> Self {
        let term = |t: &ReactionTerm| TableTerm {
            species: network.species[t.species].name.clone(),
            coefficient: t.coefficient,
        };
        KineticTable {
            species: network
                .species
                .iter()
                .map(|s| TableSpecies {
                    name: s.name.clone(),
                    initial_amount: s.initial_amount,
                })
                .collect(),
            reactions: network
                .reactions
                .iter()
                .map(|r| TableReaction {
                    name: r.name.clone(),
                    reactants: r.reactants.iter().map(term).collect(),
                    products: r.products.iter().map(term).collect(),
                    rate_constant: r.rate_constant,
                })
                .collect(),
        }
    }

    /// Resolve names to indices, producing the canonical network.
    pub fn to_network(&self) -> Result<ReactionNetwork, TableError> {
        let mut species = Vec::with_capacity(self.species.len());
        for (i, s) in self.species.iter().enumerate() {
            let pointer = format!("/species/{i}");
            if !is_valid_identifier(&s.name) {
                return Err(TableError::schema(
                    format!("{pointer}/name"),
                    format!("`{}` is not a valid identifier", s.name),
                ));
            }
            if self.species[..i].iter().any(|p| p.name == s.name) {
                return Err(TableError::schema(
                    format!("{pointer}/name"),
                    format!("duplicate species name `{}`", s.name),
                ));
            }
            if !(s.initial_amount >= 0.0 && s.initial_amount.is_finite()) {
                return Err(TableError::schema(
                    format!("{pointer}/initial_amount"),
                    "initial amount must be a finite non-negative number",
                ));
            }
            species.push(Species::new(s.name.clone(), s.initial_amount));
        }

        let mut reactions = Vec::with_capacity(self.reactions.len());
        for (i, r) in self.reactions.iter().enumerate() {
            let pointer = format!("/reactions/{i}");
            if !is_valid_identifier(&r.name) {
                return Err(TableError::schema(
                    format!("{pointer}/name"),
                    format!("`{}` is not a valid identifier", r.name),
                ));
            }
            if self.reactions[..i].iter().any(|p| p.name == r.name) {
                return Err(TableError::schema(
                    format!("{pointer}/name"),
                    format!("duplicate reaction name `{}`", r.name),
                ));
            }
            if !(r.rate_constant >= 0.0 && r.rate_constant.is_finite()) {
                return Err(TableError::schema(
                    format!("{pointer}/rate_constant"),
                    "rate constant must be a finite non-negative number",
                ));
            }
            let resolve = |side: &str, terms: &[TableTerm]| -> Result<Vec<ReactionTerm>, TableError> {
                let mut resolved = Vec::with_capacity(terms.len());
                for (j, t) in terms.iter().enumerate() {
                    let tp = format!("{pointer}/{side}/{j}");
                    if t.coefficient < 1 {
                        return Err(TableError::schema(
                            format!("{tp}/coefficient"),
                            "coefficient must be a positive integer",
                        ));
                    }
                    let index = species
                        .iter()
                        .position(|s: &Species| s.name == t.species)
                        .ok_or_else(|| {
                            TableError::schema(
                                format!("{tp}/species"),
                                format!("references undeclared species `{}`", t.species),
                            )
                        })?;
                    resolved.push(ReactionTerm::new(index, t.coefficient));
                }
                Ok(merge_terms(resolved))
            };
            reactions.push(Reaction {
                name: r.name.clone(),
                reactants: resolve("reactants", &r.reactants)?,
                products: resolve("products", &r.products)?,
                rate_constant: r.rate_constant,
            });
        }
        Ok(ReactionNetwork::new(species, reactions))
    }
}

/// Parse kinetic-table JSON bytes into a network. Unknown fields are
/// ignored and reported in the parse notes.
pub fn parse_kinetic_table(bytes: &[u8]) -> Result<Parsed, TableError> {
    let value: Value =
        serde_json::from_slice(bytes).map_err(|e| TableError::Json(e.to_string()))?;
    let mut notes = Vec::new();
    let table = walk_table(&value, &mut notes)?;
    let network = table.to_network()?;
    Ok(Parsed { network, notes })
}

/// Serialise a network to canonical kinetic-table JSON (stable field
/// order, two-space indentation, trailing newline).
pub fn emit_kinetic_table(network: &ReactionNetwork) -> Vec<u8> {
    let table = KineticTable::from_network(network);
    let mut bytes = serde_json::to_vec_pretty(&table).expect("kinetic table serialises");
    bytes.push(b'\n');
    bytes
}

fn walk_table(value: &Value, notes: &mut Vec<String>) -> Result<KineticTable, TableError> {
    let object = as_object(value, "")?;
    report_unknown_fields(object, &["species", "reactions"], "", notes);

    let species_value = object
        .get("species")
        .ok_or_else(|| TableError::schema("", "missing required field `species`"))?;
    let reactions_value = object
        .get("reactions")
        .ok_or_else(|| TableError::schema("", "missing required field `reactions`"))?;

    let mut species = Vec::new();
    for (i, item) in as_array(species_value, "/species")?.iter().enumerate() {
        let pointer = format!("/species/{i}");
        let obj = as_object(item, &pointer)?;
        report_unknown_fields(obj, &["name", "initial_amount"], &pointer, notes);
        species.push(TableSpecies {
            name: get_string(obj, &pointer, "name")?,
            initial_amount: get_number(obj, &pointer, "initial_amount")?,
        });
    }

    let mut reactions = Vec::new();
    for (i, item) in as_array(reactions_value, "/reactions")?.iter().enumerate() {
        let pointer = format!("/reactions/{i}");
        let obj = as_object(item, &pointer)?;
        report_unknown_fields(
            obj,
            &["name", "reactants", "products", "rate_constant"],
            &pointer,
            notes,
        );
        let mut sides = [Vec::new(), Vec::new()];
        for (slot, side) in sides.iter_mut().zip(["reactants", "products"]) {
            let sp = format!("{pointer}/{side}");
            let side_value = obj
                .get(side)
                .ok_or_else(|| TableError::schema(&pointer, format!("missing required field `{side}`")))?;
            for (j, term) in as_array(side_value, &sp)?.iter().enumerate() {
                let tp = format!("{sp}/{j}");
                let term_obj = as_object(term, &tp)?;
                report_unknown_fields(term_obj, &["species", "coefficient"], &tp, notes);
                slot.push(TableTerm {
                    species: get_string(term_obj, &tp, "species")?,
                    coefficient: get_integer(term_obj, &tp, "coefficient")?,
                });
            }
        }
        let [reactants, products] = sides;
        reactions.push(TableReaction {
            name: get_string(obj, &pointer, "name")?,
            reactants,
            products,
            rate_constant: get_number(obj, &pointer, "rate_constant")?,
        });
    }

    Ok(KineticTable { species, reactions })
}

fn as_object<'v>(
    value: &'v Value,
    pointer: &str,
) -> Result<&'v serde_json::Map<String, Value>, TableError> {
    value
        .as_object()
        .ok_or_else(|| TableError::schema(pointer, "expected a JSON object"))
}

fn as_array<'v>(value: &'v Value, pointer: &str) -> Result<&'v Vec<Value>, TableError> {
    value
        .as_array()
        .ok_or_else(|| TableError::schema(pointer, "expected a JSON array"))
}

fn get_string(
    obj: &serde_json::Map<String, Value>,
    pointer: &str,
    field: &str,
) -> Result<String, TableError> {
    let value = obj
        .get(field)
        .ok_or_else(|| TableError::schema(pointer, format!("missing required field `{field}`")))?;
    value
        .as_str()
        .map(str::to_owned)
        .ok_or_else(|| TableError::schema(format!("{pointer}/{field}"), "expected a string"))
}

fn get_number(
    obj: &serde_json::Map<String, Value>,
    pointer: &str,
    field: &str,
) -> Result<f64, TableError> {
    let value = obj
        .get(field)
        .ok_or_else(|| TableError::schema(pointer, format!("missing required field `{field}`")))?;
    value
        .as_f64()
        .ok_or_else(|| TableError::schema(format!("{pointer}/{field}"), "expected a number"))
}

fn get_integer(
    obj: &serde_json::Map<String, Value>,
    pointer: &str,
    field: &str,
) -> Result<i64, TableError> {
    let value = obj
        .get(field)
        .ok_or_else(|| TableError::schema(pointer, format!("missing required field `{field}`")))?;
    value
        .as_i64()
        .ok_or_else(|| TableError::schema(format!("{pointer}/{field}"), "expected an integer"))
}

fn report_unknown_fields(
    obj: &serde_json::Map<String, Value>,
    known: &[&str],
    pointer: &str,
    notes: &mut Vec<String>,
) {
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            notes.push(format!("unknown field `{pointer}/{key}` ignored"));
        }
    }
}
