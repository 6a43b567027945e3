//! Mass-action rate and propensity evaluation.

use serde::{Deserialize, Serialize};

use crate::network::{ReactionNetwork, ReactionTerm};
use crate::scalar::Scalar;

/// How a reaction's stochastic propensity is formed from the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropensityMode {
    /// `k * prod_j X_j^a_ij`, forced to zero whenever some reactant
    /// count is below its coefficient so populations can never go
    /// negative.
    #[default]
    PowerLaw,
    /// Distinct-combination counting,
    /// `k * prod_j X_j (X_j - 1) ... (X_j - a_ij + 1) / a_ij!`.
    Combinatorial,
}

impl PropensityMode {
    /// Stable identifier used in CLI flags and metadata files.
    pub fn as_str(self) -> &'static str {
        match self {
            PropensityMode::PowerLaw => "paper",
            PropensityMode::Combinatorial => "combinatorial",
        }
    }
}

/// Rate of one reaction term product, shared by [`reaction_rate`] and the
/// engines' compiled evaluation paths.
pub fn term_product<F: Scalar>(terms: &[ReactionTerm], state: &[F], mode: PropensityMode) -> F {
    let mut product = F::one();
    for term in terms {
        let x = state[term.species];
        match mode {
            PropensityMode::PowerLaw => {
                if x < F::from_count(term.coefficient) {
                    return F::zero();
                }
                product = product * x.powi(term.coefficient as i32);
            }
            PropensityMode::Combinatorial => {
                let mut falling = F::one();
                let mut factorial = F::one();
                for i in 0..term.coefficient {
                    falling = falling * (x - F::from_count(i));
                    factorial = factorial * F::from_count(i + 1);
                }
                if falling <= F::zero() {
                    return F::zero();
                }
                product = product * falling / factorial;
            }
        }
    }
    product
}

/// Plain power-law monomial `prod_j X_j^a_ij` with no availability
/// guard: the continuous-concentration form used by the ODE engine.
pub fn unguarded_power_product<F: Scalar>(terms: &[ReactionTerm], state: &[F]) -> F {
    terms
        .iter()
        .map(|term| state[term.species].powi(term.coefficient as i32))
        .fold(F::one(), |acc, f| acc * f)
}

/// Evaluate the rate (propensity) of reaction `reaction_index` at `state`.
///
/// State entries are counts for the stochastic engine; both modes return
/// zero as soon as any reactant cannot be supplied, and agree exactly on
/// reactions whose reactant coefficients are all one.
pub fn reaction_rate<F: Scalar>(
    network: &ReactionNetwork,
    reaction_index: usize,
    state: &[F],
    mode: PropensityMode,
) -> F {
    let reaction = &network.reactions[reaction_index];
    let k = F::from_f64_lossy(reaction.rate_constant);
    k * term_product(&reaction.reactants, state, mode)
}

/// All reaction rates at once.
pub fn all_rates<F: Scalar>(network: &ReactionNetwork, state: &[F], mode: PropensityMode) -> Vec<F> {
    (0..network.n_reactions())
        .map(|j| reaction_rate(network, j, state, mode))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Reaction, Species};

    fn state(counts: &[i64]) -> Vec<f64> {
        counts.iter().map(|&c| c as f64).collect()
    }

    fn enzyme_binding() -> ReactionNetwork {
        ReactionNetwork::new(
            vec![
                Species::new("E", 100.0),
                Species::new("S", 100.0),
                Species::new("ES", 0.0),
            ],
            vec![Reaction::new(
                "enzyme_r1",
                vec![ReactionTerm::new(0, 1), ReactionTerm::new(1, 1)],
                vec![ReactionTerm::new(2, 1)],
                0.001,
            )],
        )
    }

    fn dimerisation() -> ReactionNetwork {
        ReactionNetwork::new(
            vec![Species::new("M1", 10.0), Species::new("M2", 0.0)],
            vec![Reaction::new(
                "r",
                vec![ReactionTerm::new(0, 2)],
                vec![ReactionTerm::new(1, 1)],
                0.0038,
            )],
        )
    }

    #[test]
    fn bimolecular_rate_same_in_both_modes() {
        let net = enzyme_binding();
        let s = state(&[100, 100, 0]);
        let power = reaction_rate(&net, 0, &s, PropensityMode::PowerLaw);
        let comb = reaction_rate(&net, 0, &s, PropensityMode::Combinatorial);
        assert_eq!(power, 10.0);
        assert_eq!(comb, 10.0);
    }

    #[test]
    fn dimerisation_modes_differ() {
        let net = dimerisation();
        let s = state(&[10, 0]);
        let power = reaction_rate(&net, 0, &s, PropensityMode::PowerLaw);
        let comb = reaction_rate(&net, 0, &s, PropensityMode::Combinatorial);
        assert!((power - 0.38).abs() < 1e-12, "power-law mode: {power}");
        // 0.0038 * (10 * 9 / 2)
        assert!((comb - 0.171).abs() < 1e-12, "combinatorial mode: {comb}");
    }

    #[test]
    fn insufficient_reactants_give_zero() {
        let net = dimerisation();
        let s = state(&[1, 0]);
        assert_eq!(reaction_rate(&net, 0, &s, PropensityMode::PowerLaw), 0.0);
        assert_eq!(
            reaction_rate(&net, 0, &s, PropensityMode::Combinatorial),
            0.0
        );
    }

    #[test]
    fn zero_count_gives_zero_rate() {
        let net = enzyme_binding();
        let s = state(&[0, 100, 0]);
        assert_eq!(reaction_rate(&net, 0, &s, PropensityMode::PowerLaw), 0.0);
        assert_eq!(
            reaction_rate(&net, 0, &s, PropensityMode::Combinatorial),
            0.0
        );
    }

    #[test]
    fn source_reaction_rate_is_the_constant() {
        let net = ReactionNetwork::new(
            vec![Species::new("M0", 0.0)],
            vec![Reaction::new(
                "src",
                vec![],
                vec![ReactionTerm::new(0, 1)],
                2.5,
            )],
        );
        let s = state(&[0]);
        assert_eq!(reaction_rate(&net, 0, &s, PropensityMode::PowerLaw), 2.5);
        assert_eq!(
            reaction_rate(&net, 0, &s, PropensityMode::Combinatorial),
            2.5
        );
    }
}
