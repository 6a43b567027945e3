//! Stoichiometry matrix construction and conservation analysis.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::network::ReactionNetwork;

/// Integer net-change matrix, species rows by reaction columns:
/// `entries[i][j] = (product coefficient of species i in reaction j)
/// - (reactant coefficient of species i in reaction j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoichiometryMatrix {
    entries: Vec<i64>,
    n_species: usize,
    n_reactions: usize,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl StoichiometryMatrix {
    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn n_reactions(&self) -> usize {
        self.n_reactions
    }

    pub fn get(&self, species: usize, reaction: usize) -> i64 {
        self.entries[species * self.n_reactions + reaction]
    }

    /// Net state change of one reaction as a dense column vector.
    pub fn column(&self, reaction: usize) -> Vec<i64> {
        (0..self.n_species)
            .map(|i| self.get(i, reaction))
            .collect()
    }

    /// Sparse (species, delta) pairs of one reaction column.
    pub fn column_deltas(&self, reaction: usize) -> Vec<(usize, i64)> {
        (0..self.n_species)
            .filter_map(|i| {
                let v = self.get(i, reaction);
                (v != 0).then_some((i, v))
            })
            .collect()
    }

    /// Apply reaction `j` once to `state` in place.
    pub fn apply_column(&self, reaction: usize, state: &mut [i64]) {
        for (i, slot) in state.iter_mut().enumerate().take(self.n_species) {
            *slot += self.get(i, reaction);
        }
    }
}

/// Build the stoichiometry matrix of a structurally valid network.
///
/// Rows follow the network species order, columns the reaction order.
pub fn build_stoichiometry(network: &ReactionNetwork) -> StoichiometryMatrix {
    let m = network.n_species();
    let n = network.n_reactions();
    let mut entries = vec![0i64; m * n];
    for (j, reaction) in network.reactions.iter().enumerate() {
        for term in &reaction.reactants {
            entries[term.species * n + j] -= term.coefficient;
        }
        for term in &reaction.products {
            entries[term.species * n + j] += term.coefficient;
        }
    }
    StoichiometryMatrix {
        entries,
        n_species: m,
        n_reactions: n,
        row_labels: network.species_names(),
        col_labels: network.reactions.iter().map(|r| r.name.clone()).collect(),
    }
}

/// Integer basis of the left null-space of `S`: vectors `v` with
/// `v' S = 0`. Along any trajectory driven by the matrix columns the
/// weighted population `v . x` is then invariant, which makes these
/// vectors exact conservation checks for the engines.
///
/// The basis is computed by Gaussian elimination over rationals on the
/// transposed matrix and scaled to primitive integer vectors with a
/// positive leading entry. Returns an empty list when the left
/// null-space is trivial.
pub fn conservation_vectors(matrix: &StoichiometryMatrix) -> Vec<Vec<i64>> {
    let m = matrix.n_species();
    let n = matrix.n_reactions();
    if m == 0 {
        return Vec::new();
    }

    // Rows of the system are the reactions (S^T), unknowns the species weights.
    let mut rows: Vec<Vec<Ratio<i128>>> = (0..n)
        .map(|j| {
            (0..m)
                .map(|i| Ratio::from_integer(matrix.get(i, j) as i128))
                .collect()
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut pivot_row = 0usize;
    for col in 0..m {
        let Some(found) =
            (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero())
        else {
            continue;
        };
        rows.swap(pivot_row, found);
        let pivot = rows[pivot_row][col];
        for entry in rows[pivot_row].iter_mut() {
            *entry /= pivot;
        }
        let pivot_values = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let factor = row[col];
                for (dst, &src) in row.iter_mut().zip(&pivot_values) {
                    *dst -= src * factor;
                }
            }
        }
        pivot_cols.push(col);
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }

    let free_cols: Vec<usize> = (0..m).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::with_capacity(free_cols.len());
    for &free in &free_cols {
        let mut v = vec![Ratio::from_integer(0i128); m];
        v[free] = Ratio::from_integer(1);
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -rows[r][free];
        }
        basis.push(scale_to_integers(&v));
    }
    basis
}

/// Scale a rational vector to a primitive integer vector with positive
/// first nonzero entry.
fn scale_to_integers(v: &[Ratio<i128>]) -> Vec<i64> {
    let denom_lcm = v
        .iter()
        .filter(|x| !x.is_zero())
        .fold(1i128, |acc, x| acc.lcm(x.denom()));
    let mut ints: Vec<i128> = v.iter().map(|x| (x * denom_lcm).to_integer()).collect();
    let gcd = ints
        .iter()
        .filter(|&&x| x != 0)
        .fold(0i128, |acc, &x| acc.gcd(&x));
    if gcd > 1 {
        for x in ints.iter_mut() {
            *x /= gcd;
        }
    }
    if let Some(first) = ints.iter().find(|&&x| x != 0) {
        if first.is_negative() {
            for x in ints.iter_mut() {
                *x = -*x;
            }
        }
    }
    ints.into_iter().map(|x| x as i64).collect()
}

/// Weighted population `v . x` in exact integer arithmetic.
pub fn weighted_total(v: &[i64], state: &[i64]) -> i64 {
    v.iter().zip(state).map(|(w, x)| w * x).sum()
}
