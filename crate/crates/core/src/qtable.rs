//! Per-city ranked candidate lists with mutable Q-values.
//!
//! The table is shared by the crossover engine (which only reads it) and the
//! local search (which updates it after each k-opt episode). Variant
//! configurations can instead rank candidates by plain distance or by
//! alpha-value; those tables are never updated.

use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::Instance;
use crate::one_tree::nearest_neighbor_lists;

pub const DEFAULT_K: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QEntry {
    pub city: usize,
    pub q: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QError {
    #[error("state-action pair ({0}, {1}) is not in the candidate list of {0}")]
    PairNotInCandidates(usize, usize),
    #[error("episode path must have even length >= 4, got {0}")]
    BadEpisode(usize),
}

#[derive(Debug, Clone)]
pub struct QTable {
    /// Per-city candidate list, sorted by q descending.
    entries: Vec<Vec<QEntry>>,
    pub k: usize,
    /// The 1-tree lower bound used at initialization (0 for rank-only tables).
    pub lower_bound: f64,
}

impl QTable {
    /// Initial Q-values from alpha lists: q = L(T) / (alpha + d).
    ///
    /// Coincident city pairs with alpha = 0 make the denominator vanish;
    /// those edges get q = L(T) / eps with eps = 1e-6 * L(T) / n, raised to
    /// the top of the list.
    pub fn init_q(
        inst: &Instance,
        alpha_lists: &[Vec<(usize, f64)>],
        lower_bound: f64,
        k: usize,
    ) -> QTable {
        let n = inst.n;
        let eps = 1e-6 * (lower_bound / n as f64);
        let mut entries: Vec<Vec<QEntry>> = Vec::with_capacity(n);
        for (i, list) in alpha_lists.iter().enumerate() {
            let mut row: Vec<QEntry> = Vec::with_capacity(list.len());
            let mut degenerate: Vec<usize> = Vec::new();
            for (slot, &(j, alpha)) in list.iter().enumerate() {
                let denom = alpha + inst.distance(i, j) as f64;
                if denom <= 0.0 {
                    degenerate.push(slot);
                    row.push(QEntry { city: j, q: 0.0 });
                } else {
                    row.push(QEntry {
                        city: j,
                        q: lower_bound / denom,
                    });
                }
            }
            if !degenerate.is_empty() {
                let max_q = row
                    .iter()
                    .map(|e| e.q)
                    .fold(f64::NEG_INFINITY, f64::max)
                    .max(if eps > 0.0 { lower_bound / eps } else { 1.0 });
                for slot in degenerate {
                    row[slot].q = max_q;
                }
            }
            row.sort_by(|a, b| b.q.total_cmp(&a.q));
            row.truncate(k.min(n - 1));
            entries.push(row);
        }
        QTable { entries, k, lower_bound }
    }

    /// Candidates ranked by plain distance, ascending.
    pub fn rank_by_distance(inst: &Instance, k: usize) -> QTable {
        let lists = nearest_neighbor_lists(inst, k.min(inst.n - 1));
        let entries = lists
            .iter()
            .enumerate()
            .map(|(i, list)| {
                list.iter()
                    .map(|&j| QEntry {
                        city: j,
                        q: -(inst.distance(i, j) as f64),
                    })
                    .collect()
            })
            .collect();
        QTable { entries, k, lower_bound: 0.0 }
    }

    /// Candidates ranked by alpha-value, ascending.
    pub fn rank_by_alpha(alpha_lists: &[Vec<(usize, f64)>], k: usize) -> QTable {
        let entries = alpha_lists
            .iter()
            .map(|list| {
                let mut row: Vec<QEntry> = list
                    .iter()
                    .map(|&(j, a)| QEntry { city: j, q: -a })
                    .collect();
                row.truncate(k);
                row
            })
            .collect();
        QTable { entries, k, lower_bound: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// The first min(top, list length) candidates of `city`.
    #[inline]
    pub fn candidates(&self, city: usize, top: usize) -> &[QEntry] {
        let row = &self.entries[city];
        &row[..top.min(row.len())]
    }

    #[inline]
    pub fn max_q(&self, city: usize) -> f64 {
        // rows are kept sorted descending between updates of other rows, but
        // an in-episode update may have touched this row, so scan
        self.entries[city]
            .iter()
            .map(|e| e.q)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn entry_mut(&mut self, city: usize, neighbor: usize) -> Option<&mut QEntry> {
        self.entries[city].iter_mut().find(|e| e.city == neighbor)
    }

    /// Q-learning update over one k-opt episode path
    /// p = (p1, p2, ..., p_2m): for each state-action pair
    /// (p_2k, p_2k+1), k = 1..m-1,
    ///   reward r_k = d(p_2k-1, p_2k) - d(p_2k, p_2k+1)
    ///   Q <- (1-lambda) Q + lambda (r_k + gamma * max_a' Q(p_2k+2, a'))
    /// applied sequentially in ascending k, in place. The successor of the
    /// final pair wraps to p2 when the path index runs out; setting
    /// `final_pair_bootstrap` to false drops the bootstrap term on the final
    /// pair instead.
    pub fn update_episode(
        &mut self,
        inst: &Instance,
        path: &[usize],
        lambda: f64,
        gamma: f64,
        final_pair_bootstrap: bool,
    ) -> Result<(), QError> {
        let len = path.len();
        if len < 4 || len % 2 != 0 {
            return Err(QError::BadEpisode(len));
        }
        let pairs = len / 2 - 1;
        for k in 1..=pairs {
            let state = path[2 * k - 1];
            let action = path[2 * k];
            let reward =
                (inst.distance(path[2 * k - 2], state) - inst.distance(state, action)) as f64;
            let bootstrap = if k == pairs && !final_pair_bootstrap {
                0.0
            } else {
                let successor = if 2 * k + 1 < len { path[2 * k + 1] } else { path[1] };
                let m = self.max_q(successor);
                if m.is_finite() {
                    gamma * m
                } else {
                    0.0
                }
            };
            let entry = self
                .entry_mut(state, action)
                .ok_or(QError::PairNotInCandidates(state, action))?;
            entry.q = (1.0 - lambda) * entry.q + lambda * (reward + bootstrap);
        }
        Ok(())
    }

    /// Re-sorts every per-city list by q descending; stable on exact ties.
    pub fn resort(&mut self) {
        for row in &mut self.entries {
            row.sort_by(|a, b| b.q.total_cmp(&a.q));
        }
    }

    /// Debug dump, one "i j q" line per stored entry.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.entries.iter().enumerate() {
            for e in row {
                let _ = writeln!(out, "{} {} {}", i, e.city, e.q);
            }
        }
        out
    }
}
