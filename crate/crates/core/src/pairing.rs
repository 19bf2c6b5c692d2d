//! One-to-one pairing of cooperating cell-center users with cell-edge users.
//!
//! The pairing minimizes the total Euclidean distance between matched users,
//! solved exactly with the Hungarian method in O(K^3).

use thiserror::Error;

use crate::scenario::{euclidean_distance, UserLayout};

#[derive(Debug, Error, PartialEq)]
pub enum PairingError {
    #[error("cooperator/edge count mismatch: {cooperators} vs {edges}")]
    CountMismatch { cooperators: usize, edges: usize },
    #[error("cost matrix entry ({row}, {col}) is not finite")]
    NonFiniteCost { row: usize, col: usize },
    #[error("cost matrix is empty")]
    Empty,
}

/// Square matrix of pairing costs, row = cooperator, column = edge user.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| rows[i][j])
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }
}

/// A perfect matching: cooperator i pairs with edge user `edge_for[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub edge_for: Vec<usize>,
    pub total_cost: f64,
}

/// Pairwise distances between cooperators and edge users.
pub fn distance_matrix(layout: &UserLayout) -> Result<CostMatrix, PairingError> {
    let cooperators: Vec<_> = layout.cooperators().copied().collect();
    if cooperators.len() != layout.edge_users.len() {
        return Err(PairingError::CountMismatch {
            cooperators: cooperators.len(),
            edges: layout.edge_users.len(),
        });
    }
    Ok(CostMatrix::from_fn(cooperators.len(), |i, j| {
        euclidean_distance(cooperators[i], layout.edge_users[j])
    }))
}

/// Minimum-total-cost perfect matching via the Hungarian method with row and
/// column potentials (shortest augmenting paths). When several matchings are
/// optimal the internal scan order picks one deterministically; the total
/// cost is unique either way.
pub fn hungarian(cost: &CostMatrix) -> Result<Assignment, PairingError> {
    let n = cost.size();
    if n == 0 {
        return Err(PairingError::Empty);
    }
    for i in 0..n {
        for j in 0..n {
            if !cost.at(i, j).is_finite() {
                return Err(PairingError::NonFiniteCost { row: i, col: j });
            }
        }
    }

    // 1-based arrays; index 0 is the virtual unmatched column.
    let mut row_potential = vec![0.0f64; n + 1];
    let mut col_potential = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // matched_row[col] = row occupying col
    let mut path = vec![0usize; n + 1];

    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut visited = vec![false; n + 1];

        loop {
            visited[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if visited[j] {
                    continue;
                }
                let reduced = cost.at(i0 - 1, j - 1) - row_potential[i0] - col_potential[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    path[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if visited[j] {
                    row_potential[matched_row[j]] += delta;
                    col_potential[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }

        // Augment along the alternating path back to the virtual column.
        while j0 != 0 {
            let j1 = path[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
        }
    }

    let mut edge_for = vec![0usize; n];
    for col in 1..=n {
        edge_for[matched_row[col] - 1] = col - 1;
    }
    let total_cost = edge_for
        .iter()
        .enumerate()
        .map(|(i, &j)| cost.at(i, j))
        .sum();
    Ok(Assignment { edge_for, total_cost })
}
