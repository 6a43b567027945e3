//! Machine-checkable network validation.
//!
//! The report either admits a network to the simulation engines or, in
//! the LLM extraction loop, becomes the repair feedback sent back to
//! the model. Error-severity issues block simulation; warnings pass
//! through to the user.

use serde::{Deserialize, Serialize};

use crate::network::{is_valid_identifier, ReactionNetwork};
use crate::stoich::build_stoichiometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

/// Issue codes, stable across releases:
///
/// * `E01` duplicate name
/// * `E02` dangling species reference
/// * `E03` negative rate constant
/// * `E04` no-op reaction (identical sides)
/// * `E05` empty network
/// * `W01` zero rate constant (inactive reaction)
/// * `W02` fractional initial amount (floored for stochastic runs)
/// * `W03` species never produced nor consumed
/// * `W04` all-zero stoichiometry column
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IssueCode {
    E01,
    E02,
    E03,
    E04,
    E05,
    W01,
    W02,
    W03,
    W04,
}

impl IssueCode {
    pub fn severity(self) -> Severity {
        match self {
            IssueCode::E01 | IssueCode::E02 | IssueCode::E03 | IssueCode::E04 | IssueCode::E05 => {
                Severity::Error
            }
            _ => Severity::Warning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    pub severity: Severity,
    /// Species or reaction name, or `network` for whole-network issues.
    pub subject: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
    pub is_admissible: bool,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Warning)
    }

    /// Stable JSON rendering used by the CLI and the repair loop.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Run all checks; deterministic for a given network.
pub fn validate(network: &ReactionNetwork) -> ValidationReport {
    let mut issues = Vec::new();
    fn push(issues: &mut Vec<Issue>, code: IssueCode, subject: &str, message: String) {
        issues.push(Issue {
            code,
            severity: code.severity(),
            subject: subject.to_owned(),
            message,
        });
    }

    if network.species.is_empty() || network.reactions.is_empty() {
        let what = match (network.species.is_empty(), network.reactions.is_empty()) {
            (true, true) => "no species and no reactions",
            (true, false) => "no species",
            _ => "no reactions",
        };
        push(
            &mut issues,
            IssueCode::E05,
            "network",
            format!("network is empty ({what}); nothing to simulate"),
        );
    }

    // E01: duplicate names, within a kind and across kinds (species and
    // reaction identifiers share one namespace in exported models).
    let mut seen: Vec<&str> = Vec::new();
    for s in &network.species {
        if seen.contains(&s.name.as_str()) {
            push(
                &mut issues,
                IssueCode::E01,
                &s.name,
                format!("duplicate name `{}`", s.name),
            );
        }
        seen.push(&s.name);
    }
    for r in &network.reactions {
        if seen.contains(&r.name.as_str()) {
            push(
                &mut issues,
                IssueCode::E01,
                &r.name,
                format!("duplicate name `{}`", r.name),
            );
        }
        seen.push(&r.name);
    }

    for s in &network.species {
        if !is_valid_identifier(&s.name) {
            push(
                &mut issues,
                IssueCode::E02,
                &s.name,
                format!("species name `{}` is not a valid identifier", s.name),
            );
        }
        if s.initial_amount < 0.0 || !s.initial_amount.is_finite() {
            push(
                &mut issues,
                IssueCode::E03,
                &s.name,
                format!(
                    "species `{}` has invalid initial amount {}",
                    s.name, s.initial_amount
                ),
            );
        } else if s.initial_amount.fract() != 0.0 {
            push(
                &mut issues,
                IssueCode::W02,
                &s.name,
                format!(
                    "initial amount {} of `{}` is fractional; stochastic runs floor it to {}",
                    s.initial_amount,
                    s.name,
                    s.initial_amount.floor()
                ),
            );
        }
    }

    let m = network.n_species();
    for r in &network.reactions {
        for term in r.reactants.iter().chain(&r.products) {
            if term.species >= m {
                push(
                    &mut issues,
                    IssueCode::E02,
                    &r.name,
                    format!(
                        "reaction `{}` references species index {} but the network has {} species",
                        r.name, term.species, m
                    ),
                );
            } else if term.coefficient < 1 {
                push(
                    &mut issues,
                    IssueCode::E02,
                    &r.name,
                    format!(
                        "reaction `{}` has non-positive coefficient {} for `{}`",
                        r.name, term.coefficient, network.species[term.species].name
                    ),
                );
            }
        }
        if r.rate_constant < 0.0 || !r.rate_constant.is_finite() {
            push(
                &mut issues,
                IssueCode::E03,
                &r.name,
                format!(
                    "reaction `{}` has invalid rate constant {}",
                    r.name, r.rate_constant
                ),
            );
        } else if r.rate_constant == 0.0 {
            push(
                &mut issues,
                IssueCode::W01,
                &r.name,
                format!("reaction `{}` has rate constant 0 and can never fire", r.name),
            );
        }
        let mut lhs: Vec<_> = r.reactants.iter().map(|t| (t.species, t.coefficient)).collect();
        let mut rhs: Vec<_> = r.products.iter().map(|t| (t.species, t.coefficient)).collect();
        lhs.sort_unstable();
        rhs.sort_unstable();
        if lhs == rhs && !lhs.is_empty() {
            push(
                &mut issues,
                IssueCode::E04,
                &r.name,
                format!("reaction `{}` has identical sides and no net effect", r.name),
            );
        }
        if r.reactants.is_empty() && r.products.is_empty() {
            push(
                &mut issues,
                IssueCode::E04,
                &r.name,
                format!("reaction `{}` has two empty sides", r.name),
            );
        }
    }

    // Structure-level checks only make sense once indices are in bounds.
    let structurally_sound = !issues.iter().any(|i| i.code == IssueCode::E02);
    if structurally_sound {
        for (i, s) in network.species.iter().enumerate() {
            let mentioned = network.reactions.iter().any(|r| {
                r.reactants.iter().chain(&r.products).any(|t| t.species == i)
            });
            if !mentioned && !network.reactions.is_empty() {
                push(
                    &mut issues,
                    IssueCode::W03,
                    &s.name,
                    format!("species `{}` is never produced nor consumed", s.name),
                );
            }
        }
        let matrix = build_stoichiometry(network);
        for j in 0..matrix.n_reactions() {
            if matrix.column_deltas(j).is_empty() {
                push(
                    &mut issues,
                    IssueCode::W04,
                    &matrix.col_labels[j],
                    format!(
                        "stoichiometry column of `{}` is all zero",
                        matrix.col_labels[j]
                    ),
                );
            }
        }
    }

    let is_admissible = !issues.iter().any(|i| i.severity == Severity::Error);
    ValidationReport {
        issues,
        is_admissible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Reaction, ReactionTerm, Species};

    #[test]
    fn empty_network_is_inadmissible() {
        let report = validate(&ReactionNetwork::default());
        assert!(!report.is_admissible);
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.issues[0].code, IssueCode::E05);
    }

    #[test]
    fn noop_reaction_flagged() {
        let net = ReactionNetwork::new(
            vec![Species::new("A", 1.0)],
            vec![Reaction::new(
                "r",
                vec![ReactionTerm::new(0, 1)],
                vec![ReactionTerm::new(0, 1)],
                1.0,
            )],
        );
        let report = validate(&net);
        assert!(!report.is_admissible);
        assert!(report.issues.iter().any(|i| i.code == IssueCode::E04));
        assert!(report.issues.iter().any(|i| i.code == IssueCode::W04));
    }

    #[test]
    fn zero_rate_is_warning_only() {
        let net = ReactionNetwork::new(
            vec![Species::new("A", 1.0), Species::new("B", 0.0)],
            vec![Reaction::new(
                "r",
                vec![ReactionTerm::new(0, 1)],
                vec![ReactionTerm::new(1, 1)],
                0.0,
            )],
        );
        let report = validate(&net);
        assert!(report.is_admissible);
        assert_eq!(report.warnings().count(), 1);
        assert_eq!(report.issues[0].code, IssueCode::W01);
    }

    #[test]
    fn fractional_amount_and_unused_species_warn() {
        let net = ReactionNetwork::new(
            vec![
                Species::new("A", 1.5),
                Species::new("B", 0.0),
                Species::new("Idle", 3.0),
            ],
            vec![Reaction::new(
                "r",
                vec![ReactionTerm::new(0, 1)],
                vec![ReactionTerm::new(1, 1)],
                1.0,
            )],
        );
        let report = validate(&net);
        assert!(report.is_admissible);
        let codes: Vec<_> = report.issues.iter().map(|i| i.code).collect();
        assert!(codes.contains(&IssueCode::W02));
        assert!(codes.contains(&IssueCode::W03));
    }

    #[test]
    fn dangling_reference_and_negative_rate_are_errors() {
        let net = ReactionNetwork::new(
            vec![Species::new("A", 1.0)],
            vec![
                Reaction::new("r1", vec![ReactionTerm::new(5, 1)], vec![], 1.0),
                Reaction::new("r2", vec![ReactionTerm::new(0, 1)], vec![], -2.0),
            ],
        );
        let report = validate(&net);
        assert!(!report.is_admissible);
        let codes: Vec<_> = report.issues.iter().map(|i| i.code).collect();
        assert!(codes.contains(&IssueCode::E02));
        assert!(codes.contains(&IssueCode::E03));
    }

    #[test]
    fn duplicate_names_across_kinds_are_errors() {
        let net = ReactionNetwork::new(
            vec![Species::new("A", 1.0), Species::new("B", 0.0)],
            vec![Reaction::new(
                "A",
                vec![ReactionTerm::new(0, 1)],
                vec![ReactionTerm::new(1, 1)],
                1.0,
            )],
        );
        let report = validate(&net);
        assert!(!report.is_admissible);
        assert!(report.issues.iter().any(|i| i.code == IssueCode::E01));
    }

    #[test]
    fn validation_is_deterministic() {
        let net = ReactionNetwork::new(
            vec![Species::new("A", 1.5)],
            vec![Reaction::new("r", vec![ReactionTerm::new(0, 1)], vec![], 0.0)],
        );
        assert_eq!(validate(&net), validate(&net));
    }

    #[test]
    fn report_json_is_stable() {
        let net = ReactionNetwork::default();
        let report = validate(&net);
        let json = report.to_json();
        assert!(json.contains("\"code\": \"E05\""));
        assert!(json.contains("\"is_admissible\": false"));
    }
}
