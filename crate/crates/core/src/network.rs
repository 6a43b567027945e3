//! Canonical in-memory representation of a reaction network.
//!
//! Every input path (DSL, kinetic-table JSON, LLM extraction, SBML
//! subset import) converges on [`ReactionNetwork`]. The structs here are
//! plain data: structural invariants (unique names, in-bounds species
//! references, non-negative constants) are established by the parsers
//! and re-checked by the validator, so that malformed networks can be
//! *represented* and reported on rather than being unconstructible.

use serde::{Deserialize, Serialize};

/// A chemical species and its initial population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    /// Non-negative. The stochastic engine floors this to an integer
    /// count; the deterministic engine uses it as-is.
    pub initial_amount: f64,
}

impl Species {
    pub fn new(name: impl Into<String>, initial_amount: f64) -> Self {
        Self {
            name: name.into(),
            initial_amount,
        }
    }
}

/// One side-entry of a reaction: a species index with its
/// stoichiometric coefficient (always >= 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactionTerm {
    pub species: usize,
    pub coefficient: i64,
}

impl ReactionTerm {
    pub fn new(species: usize, coefficient: i64) -> Self {
        Self {
            species,
            coefficient,
        }
    }
}

/// A single irreversible reaction with a mass-action rate constant.
///
/// Reversible schemes are written as two reactions. An empty reactant
/// list denotes a source reaction, an empty product list pure
/// degradation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub name: String,
    pub reactants: Vec<ReactionTerm>,
    pub products: Vec<ReactionTerm>,
    pub rate_constant: f64,
}

impl Reaction {
    pub fn new(
        name: impl Into<String>,
        reactants: Vec<ReactionTerm>,
        products: Vec<ReactionTerm>,
        rate_constant: f64,
    ) -> Self {
        Self {
            name: name.into(),
            reactants: merge_terms(reactants),
            products: merge_terms(products),
            rate_constant,
        }
    }

    /// Sum of reactant coefficients (the reaction order under mass action).
    pub fn order(&self) -> i64 {
        self.reactants.iter().map(|t| t.coefficient).sum()
    }
}

/// Merge duplicate species mentions on one reaction side into a single
/// term with the summed coefficient (`M1 + M1` becomes `2 M1`), keeping
/// first-mention order.
pub fn merge_terms(terms: Vec<ReactionTerm>) -> Vec<ReactionTerm> {
    let mut merged: Vec<ReactionTerm> = Vec::with_capacity(terms.len());
    for term in terms {
        match merged.iter_mut().find(|t| t.species == term.species) {
            Some(existing) => existing.coefficient += term.coefficient,
            None => merged.push(term),
        }
    }
    merged
}

/// An ordered set of species plus the reactions that couple them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReactionNetwork {
    pub species: Vec<Species>,
    pub reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    pub fn new(species: Vec<Species>, reactions: Vec<Reaction>) -> Self {
        Self { species, reactions }
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|s| s.name.clone()).collect()
    }

    /// Initial amounts as floating-point values (deterministic engine).
    pub fn initial_amounts(&self) -> Vec<f64> {
        self.species.iter().map(|s| s.initial_amount).collect()
    }

    /// Initial amounts floored to integer counts (stochastic engine).
    pub fn initial_counts(&self) -> Vec<i64> {
        self.species
            .iter()
            .map(|s| s.initial_amount.floor() as i64)
            .collect()
    }
}

/// `true` iff `name` matches `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
