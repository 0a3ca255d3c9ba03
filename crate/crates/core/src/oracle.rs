//! Independent exact and brute-force references used by tests, examples,
//! and the CLI's `--oracle` flag on tiny instances.

use thiserror::Error;

use crate::instance::Instance;
use crate::one_tree::{minimum_one_tree, PenaltyVector};
use crate::tour::Tour;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large for this oracle: n = {0}, limit = {1}")]
    TooLarge(usize, usize),
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub optimal_length: i64,
    pub optimal_tour: Tour,
}

/// Exact optimum by dynamic programming over city subsets. Limited to
/// n <= 18.
pub fn exact_dp(inst: &Instance) -> Result<ExactResult, OracleError> {
    let n = inst.n;
    if n > 18 {
        return Err(OracleError::TooLarge(n, 18));
    }
    let m = n - 1; // cities 1..n, paths start at city 0
    let full = 1usize << m;
    const UNSET: i64 = i64::MAX / 4;
    let mut dp = vec![UNSET; full * m];
    let mut from = vec![u8::MAX; full * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = inst.distance(0, j + 1);
    }
    for mask in 1..full {
        for last in 0..m {
            if mask & (1 << last) == 0 {
                continue;
            }
            let cur = dp[mask * m + last];
            if cur >= UNSET {
                continue;
            }
            for next in 0..m {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nmask = mask | (1 << next);
                let cand = cur + inst.distance(last + 1, next + 1);
                if cand < dp[nmask * m + next] {
                    dp[nmask * m + next] = cand;
                    from[nmask * m + next] = last as u8;
                }
            }
        }
    }
    let mut best = i64::MAX;
    let mut best_last = 0usize;
    for last in 0..m {
        let cand = dp[(full - 1) * m + last] + inst.distance(last + 1, 0);
        if cand < best {
            best = cand;
            best_last = last;
        }
    }
    // reconstruct
    let mut order = vec![0usize];
    let mut seq_rev = Vec::with_capacity(m);
    let mut mask = full - 1;
    let mut last = best_last;
    loop {
        seq_rev.push(last + 1);
        let prev = from[mask * m + last];
        mask &= !(1 << last);
        if prev == u8::MAX {
            break;
        }
        last = prev as usize;
    }
    debug_assert_eq!(mask, 0);
    order.extend(seq_rev.iter().rev());
    let tour = Tour::from_order(inst, order);
    debug_assert_eq!(tour.length(), best);
    Ok(ExactResult {
        optimal_length: best,
        optimal_tour: tour,
    })
}

/// Exact optimum by exhaustive permutation search. Limited to n <= 10; used
/// to cross-check `exact_dp`.
pub fn exhaustive_optimum(inst: &Instance) -> Result<i64, OracleError> {
    let n = inst.n;
    if n > 10 {
        return Err(OracleError::TooLarge(n, 10));
    }
    let mut perm: Vec<usize> = (1..n).collect();
    let mut best = i64::MAX;
    permute(&mut perm, 0, &mut |p| {
        let mut len = inst.distance(0, p[0]);
        for w in p.windows(2) {
            len += inst.distance(w[0], w[1]);
        }
        len += inst.distance(p[n - 2], 0);
        if len < best {
            best = len;
        }
    });
    Ok(best)
}

fn permute<F: FnMut(&[usize])>(p: &mut Vec<usize>, k: usize, visit: &mut F) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Literal alpha-value: the cost increase of the minimum 1-tree when edge
/// (i, j) is forced into it, computed by constrained Kruskal MSTs for the
/// same special node the solver picks. Limited to n <= 12.
pub fn definitional_alpha(
    inst: &Instance,
    pen: &PenaltyVector,
    i: usize,
    j: usize,
) -> Result<f64, OracleError> {
    let n = inst.n;
    if n > 12 {
        return Err(OracleError::TooLarge(n, 12));
    }
    assert!(i != j);
    let special = minimum_one_tree(inst, pen).special;
    let base = kruskal_one_tree(inst, pen, special, None);
    let plus = if i == special || j == special {
        let other = if i == special { j } else { i };
        let mst = kruskal_mst(inst, pen, special, None);
        let forced = pen.penalized(inst, special, other);
        let cheapest_other = (0..n)
            .filter(|&u| u != special && u != other)
            .map(|u| pen.penalized(inst, special, u))
            .min_by(f64::total_cmp)
            .unwrap();
        mst + forced + cheapest_other
    } else {
        kruskal_one_tree(inst, pen, special, Some((i, j)))
    };
    Ok(plus - base)
}

/// Penalized 1-tree total for a fixed special node: constrained MST plus the
/// two cheapest penalized edges at the special node.
fn kruskal_one_tree(
    inst: &Instance,
    pen: &PenaltyVector,
    special: usize,
    forced: Option<(usize, usize)>,
) -> f64 {
    let n = inst.n;
    let mst = kruskal_mst(inst, pen, special, forced);
    let mut costs: Vec<f64> = (0..n)
        .filter(|&u| u != special)
        .map(|u| pen.penalized(inst, special, u))
        .collect();
    costs.sort_by(f64::total_cmp);
    mst + costs[0] + costs[1]
}

fn kruskal_mst(
    inst: &Instance,
    pen: &PenaltyVector,
    special: usize,
    forced: Option<(usize, usize)>,
) -> f64 {
    let n = inst.n;
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        let mut c = x;
        while uf[c] != r {
            let next = uf[c];
            uf[c] = r;
            c = next;
        }
        r
    }
    let mut total = 0.0;
    let mut picked = 0usize;
    if let Some((a, b)) = forced {
        assert!(a != special && b != special);
        total += pen.penalized(inst, a, b);
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        uf[ra] = rb;
        picked += 1;
    }
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..n {
        if a == special {
            continue;
        }
        for b in (a + 1)..n {
            if b == special {
                continue;
            }
            edges.push((pen.penalized(inst, a, b), a, b));
        }
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (c, a, b) in edges {
        if picked == n - 2 {
            break;
        }
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        if ra != rb {
            uf[ra] = rb;
            total += c;
            picked += 1;
        }
    }
    assert_eq!(picked, n - 2, "spanning tree incomplete");
    total
}
