//! Tour representation: permutation array plus inverse position array, with
//! an exact cached integer length.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::Instance;
use crate::qtable::QTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TourViolation {
    DuplicateCity { city: usize },
    MissingCity { city: usize },
    PosMismatch { pos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    order: Vec<usize>,
    pos: Vec<usize>,
    length: i64,
}

impl Tour {
    pub fn from_order(inst: &Instance, order: Vec<usize>) -> Tour {
        let n = order.len();
        let mut pos = vec![0usize; n];
        for (k, &c) in order.iter().enumerate() {
            pos[c] = k;
        }
        let mut t = Tour { order, pos, length: 0 };
        t.recompute_length(inst);
        t
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    #[inline]
    pub fn city_at(&self, k: usize) -> usize {
        self.order[k]
    }

    #[inline]
    pub fn position(&self, city: usize) -> usize {
        self.pos[city]
    }

    #[inline]
    pub fn next(&self, city: usize) -> usize {
        let k = self.pos[city];
        self.order[if k + 1 == self.n() { 0 } else { k + 1 }]
    }

    #[inline]
    pub fn prev(&self, city: usize) -> usize {
        let k = self.pos[city];
        self.order[if k == 0 { self.n() - 1 } else { k - 1 }]
    }

    /// The two tour-adjacent cities of `city`, as (prev, next).
    #[inline]
    pub fn neighbors(&self, city: usize) -> (usize, usize) {
        (self.prev(city), self.next(city))
    }

    /// Cached length; exact after construction and after every applied move.
    #[inline]
    pub fn length(&self) -> i64 {
        self.length
    }

    /// Recomputes the closed-tour length from scratch and refreshes the cache.
    pub fn recompute_length(&mut self, inst: &Instance) -> i64 {
        let n = self.n();
        let mut total = 0i64;
        for k in 0..n {
            let a = self.order[k];
            let b = self.order[if k + 1 == n { 0 } else { k + 1 }];
            total += inst.distance(a, b);
        }
        self.length = total;
        total
    }

    /// Used by move application code that tracks length deltas exactly.
    #[inline]
    pub(crate) fn set_length(&mut self, len: i64) {
        self.length = len;
    }

    /// Replaces the order in place (used by k-opt move application); positions
    /// are rebuilt by the caller via `rebuild_pos`.
    #[inline]
    pub(crate) fn order_mut(&mut self) -> &mut Vec<usize> {
        &mut self.order
    }

    pub(crate) fn rebuild_pos(&mut self) {
        for k in 0..self.order.len() {
            self.pos[self.order[k]] = k;
        }
    }

    /// Checks the permutation property and pos consistency, reporting the
    /// first violation found.
    pub fn validate(&self) -> Result<(), TourViolation> {
        let n = self.n();
        let mut seen = vec![false; n];
        for &c in &self.order {
            if c >= n {
                return Err(TourViolation::MissingCity { city: c });
            }
            if seen[c] {
                return Err(TourViolation::DuplicateCity { city: c });
            }
            seen[c] = true;
        }
        if let Some(c) = seen.iter().position(|&s| !s) {
            return Err(TourViolation::MissingCity { city: c });
        }
        for k in 0..n {
            if self.pos[self.order[k]] != k {
                return Err(TourViolation::PosMismatch { pos: k });
            }
        }
        Ok(())
    }

    /// Reverses the tour segment between positions `i` and `j` inclusive
    /// (walking forward from `i` to `j` cyclically), flipping whichever side
    /// is shorter.
    pub fn reverse_segment(&mut self, i: usize, j: usize) {
        let n = self.n();
        let inner = (j + n - i) % n + 1; // cities from i to j inclusive
        let (mut a, mut b, steps) = if inner * 2 <= n {
            (i, j, inner / 2)
        } else {
            // reverse the complementary segment instead; same resulting tour
            ((j + 1) % n, (i + n - 1) % n, (n - inner) / 2)
        };
        for _ in 0..steps {
            self.order.swap(a, b);
            self.pos[self.order[a]] = a;
            self.pos[self.order[b]] = b;
            a = if a + 1 == n { 0 } else { a + 1 };
            b = if b == 0 { n - 1 } else { b - 1 };
        }
    }
}

/// Exact closed-tour length; also refreshes the cached length.
pub fn tour_length(inst: &Instance, tour: &mut Tour) -> i64 {
    tour.recompute_length(inst)
}

/// Builds one randomized tour and improves it with first-improvement 2-opt
/// sweeps restricted to each city's top-10 candidates, until a full sweep
/// finds nothing.
pub fn greedy_2opt_init<R: Rng>(inst: &Instance, qt: &QTable, rng: &mut R) -> Tour {
    let n = inst.n;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut tour = Tour::from_order(inst, order);
    if n < 4 {
        return tour;
    }

    let mut sweep: Vec<usize> = (0..n).collect();
    loop {
        sweep.shuffle(rng);
        let mut improved_any = false;
        for &a in &sweep {
            if let Some(gain) = try_2opt_at(inst, &mut tour, qt, a) {
                let new_len = tour.length() - gain;
                tour.set_length(new_len);
                improved_any = true;
            }
        }
        if !improved_any {
            break;
        }
    }
    debug_assert_eq!(tour.length(), {
        let mut t = tour.clone();
        t.recompute_length(inst)
    });
    tour
}

/// First improving candidate-restricted 2-opt exchange at city `a`; applies
/// it and returns the (positive) gain.
fn try_2opt_at(inst: &Instance, tour: &mut Tour, qt: &QTable, a: usize) -> Option<i64> {
    let n = tour.n();
    let b = tour.next(a);
    let ap = tour.prev(a);
    for e in qt.candidates(a, 10) {
        let c = e.city;
        if c == a {
            continue;
        }
        // successor form: replace (a,b),(c,d) with (a,c),(b,d)
        let d = tour.next(c);
        if c != b && d != a {
            let gain = inst.distance(a, b) + inst.distance(c, d)
                - inst.distance(a, c)
                - inst.distance(b, d);
            if gain > 0 {
                let i = (tour.position(a) + 1) % n;
                let j = tour.position(c);
                tour.reverse_segment(i, j);
                return Some(gain);
            }
        }
        // predecessor form: replace (ap,a),(cp,c) with (a,c),(ap,cp)
        let cp = tour.prev(c);
        if c != ap && cp != a {
            let gain = inst.distance(ap, a) + inst.distance(cp, c)
                - inst.distance(a, c)
                - inst.distance(ap, cp);
            if gain > 0 {
                let i = tour.position(a);
                let j = (tour.position(c) + n - 1) % n;
                tour.reverse_segment(i, j);
                return Some(gain);
            }
        }
    }
    None
}
