//! Edge assembly crossover: recombines two parent tours through AB-cycles
//! and E-sets, repairs the resulting sub-tours into one tour using
//! candidate-filtered reconnections, and selects survivors by an
//! entropy-aware evaluation over population edge frequencies.

use std::collections::HashMap;
use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::Instance;
use crate::qtable::QTable;
use crate::tour::{greedy_2opt_init, Tour};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLabel {
    A,
    B,
}

impl EdgeLabel {
    #[inline]
    fn flip(self) -> EdgeLabel {
        match self {
            EdgeLabel::A => EdgeLabel::B,
            EdgeLabel::B => EdgeLabel::A,
        }
    }
}

/// A closed alternating walk in the parent-union multigraph. Edge i runs
/// between `verts[i]` and `verts[(i+1) % len]`; labels alternate starting
/// from `first_label`.
#[derive(Debug, Clone)]
pub struct AbCycle {
    pub verts: Vec<usize>,
    pub first_label: EdgeLabel,
}

impl AbCycle {
    #[inline]
    pub fn len(&self) -> usize {
        self.verts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// Cycles of length 2 pair the two copies of an edge shared by both
    /// parents; selecting them changes nothing.
    #[inline]
    pub fn is_effective(&self) -> bool {
        self.len() > 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeLabel)> + '_ {
        let n = self.verts.len();
        let mut label = self.first_label;
        (0..n).map(move |i| {
            let e = (self.verts[i], self.verts[(i + 1) % n], label);
            label = label.flip();
            e
        })
    }
}

/// Union multigraph of the two parents: per city, two A half-edges and two
/// B half-edges. Shared edges keep both labeled copies.
pub struct AbGraph {
    /// [prev_a, next_a, prev_b, next_b]
    nbr: Vec<[usize; 4]>,
}

impl AbGraph {
    pub fn new(pa: &Tour, pb: &Tour) -> AbGraph {
        let n = pa.n();
        let mut nbr = Vec::with_capacity(n);
        for c in 0..n {
            let (ap, an) = pa.neighbors(c);
            let (bp, bn) = pb.neighbors(c);
            nbr.push([ap, an, bp, bn]);
        }
        AbGraph { nbr }
    }

    pub fn n(&self) -> usize {
        self.nbr.len()
    }
}

/// Randomly partitions all edges of the union multigraph into AB-cycles.
///
/// The walk alternates labels, choosing uniformly among the unused
/// label-consistent continuations, and extracts a cycle whenever it returns
/// to a vertex already on the open path with an even sub-walk length.
pub fn partition_ab_cycles<R: Rng>(g: &AbGraph, rng: &mut R) -> Vec<AbCycle> {
    let n = g.n();
    let mut used = vec![[false; 4]; n];
    let slots_of = |label: EdgeLabel| -> [usize; 2] {
        match label {
            EdgeLabel::A => [0, 1],
            EdgeLabel::B => [2, 3],
        }
    };

    // consume one unused `label` edge at u, chosen uniformly; marks both
    // endpoint slots and returns the neighbor
    let take_edge = |u: usize,
                     label: EdgeLabel,
                     used: &mut Vec<[bool; 4]>,
                     rng: &mut R|
     -> Option<usize> {
        let s = slots_of(label);
        let (f0, f1) = (!used[u][s[0]], !used[u][s[1]]);
        let slot = match (f0, f1) {
            (true, true) => s[usize::from(rng.random::<bool>())],
            (true, false) => s[0],
            (false, true) => s[1],
            (false, false) => return None,
        };
        let w = g.nbr[u][slot];
        used[u][slot] = true;
        let ws = slots_of(label);
        let wslot = ws
            .iter()
            .copied()
            .find(|&i| !used[w][i] && g.nbr[w][i] == u)
            .expect("half-edge bookkeeping out of sync");
        used[w][wslot] = true;
        Some(w)
    };

    let mut cycles = Vec::new();
    let mut path: Vec<usize> = Vec::new();
    let mut labels: Vec<EdgeLabel> = Vec::new();
    let mut occ: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut scan = 0usize;

    loop {
        if path.is_empty() {
            while scan < n && used[scan].iter().all(|&u| u) {
                scan += 1;
            }
            if scan == n {
                break;
            }
            path.push(scan);
            occ[scan].push(0);
        }
        let cur = *path.last().unwrap();
        let need = match labels.last() {
            Some(&l) => l.flip(),
            None => {
                let a_free = !used[cur][0] || !used[cur][1];
                let b_free = !used[cur][2] || !used[cur][3];
                match (a_free, b_free) {
                    (true, true) => {
                        if rng.random::<bool>() {
                            EdgeLabel::A
                        } else {
                            EdgeLabel::B
                        }
                    }
                    (true, false) => EdgeLabel::A,
                    (false, true) => EdgeLabel::B,
                    (false, false) => unreachable!("start vertex has no unused edges"),
                }
            }
        };
        let w = take_edge(cur, need, &mut used, rng)
            .expect("alternating walk cannot get stuck mid-path");
        labels.push(need);
        path.push(w);
        let new_idx = (path.len() - 1) as u32;

        // latest earlier occurrence of w closing an even sub-walk
        let close_at = occ[w]
            .iter()
            .rev()
            .find(|&&i| (new_idx - i) % 2 == 0)
            .copied();
        occ[w].push(new_idx);

        if let Some(i) = close_at {
            let i = i as usize;
            let m = path.len() - 1;
            let cycle_verts = path[i..m].to_vec();
            let first_label = labels[i];
            for p in (i + 1..=m).rev() {
                let popped = occ[path[p]].pop();
                debug_assert_eq!(popped, Some(p as u32));
            }
            path.truncate(i + 1);
            labels.truncate(i);
            cycles.push(AbCycle { verts: cycle_verts, first_label });
            if path.len() == 1 {
                let v = path[0];
                if used[v].iter().all(|&u| u) {
                    occ[v].pop();
                    path.clear();
                }
            }
        }
    }
    debug_assert!(path.is_empty());
    debug_assert_eq!(
        cycles.iter().map(|c| c.len()).sum::<usize>(),
        2 * n,
        "partition must conserve the labeled edge multiset"
    );
    cycles
}

/// Intermediate solution: degree-2 multigraph plus its sub-tour partition.
pub struct Intermediate {
    pub adj: Vec<[usize; 2]>,
    pub comp: Vec<u32>,
    pub members: Vec<Vec<u32>>,
    pub comp_edges: Vec<u32>,
    pub comp_count: usize,
    pub length: i64,
}

const NO_EDGE: usize = usize::MAX;

/// Applies an E-set to parent A: removes the E-set's A-edges, adds its
/// B-edges, and computes the sub-tour partition.
pub fn apply_eset(
    inst: &Instance,
    pa: &Tour,
    cycles: &[AbCycle],
    eset: &[usize],
) -> Intermediate {
    let n = pa.n();
    let mut adj: Vec<[usize; 2]> = (0..n).map(|c| [pa.prev(c), pa.next(c)]).collect();
    let mut length = pa.length();

    // removals first so slots are free for the additions
    for &ci in eset {
        for (u, v, label) in cycles[ci].edges() {
            if label == EdgeLabel::A {
                let su = adj[u].iter().position(|&x| x == v).expect("A-edge present");
                adj[u][su] = NO_EDGE;
                let sv = adj[v].iter().position(|&x| x == u).expect("A-edge present");
                adj[v][sv] = NO_EDGE;
                length -= inst.distance(u, v);
            }
        }
    }
    for &ci in eset {
        for (u, v, label) in cycles[ci].edges() {
            if label == EdgeLabel::B {
                let su = adj[u].iter().position(|&x| x == NO_EDGE).expect("free slot");
                adj[u][su] = v;
                let sv = adj[v].iter().position(|&x| x == NO_EDGE).expect("free slot");
                adj[v][sv] = u;
                length += inst.distance(u, v);
            }
        }
    }
    debug_assert!(adj.iter().all(|s| s[0] != NO_EDGE && s[1] != NO_EDGE));

    // connected components of a 2-regular multigraph are cycles
    let mut comp = vec![u32::MAX; n];
    let mut members: Vec<Vec<u32>> = Vec::new();
    let mut comp_edges: Vec<u32> = Vec::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = members.len() as u32;
        let mut mem = Vec::new();
        let mut cur = start;
        let mut prev = NO_EDGE;
        loop {
            comp[cur] = id;
            mem.push(cur as u32);
            let [a, b] = adj[cur];
            let next = if a == b {
                a // doubled edge: the component is exactly this 2-cycle
            } else if a == prev {
                b
            } else {
                a
            };
            prev = cur;
            cur = next;
            if cur == start {
                break;
            }
        }
        comp_edges.push(mem.len() as u32);
        members.push(mem);
    }
    let comp_count = members.len();
    Intermediate { adj, comp, members, comp_edges, comp_count, length }
}

/// Edges of one sub-tour in walk order.
fn subtour_edges(inter: &Intermediate, comp_id: u32) -> Vec<(usize, usize)> {
    let start = inter.members[comp_id as usize][0] as usize;
    let mut out = Vec::with_capacity(inter.members[comp_id as usize].len());
    let mut cur = start;
    let mut prev = NO_EDGE;
    loop {
        let [a, b] = inter.adj[cur];
        let next = if a == b {
            a
        } else if a == prev {
            b
        } else {
            a
        };
        out.push((cur, next));
        prev = cur;
        cur = next;
        if cur == start {
            break;
        }
    }
    out
}

#[derive(Clone, Copy)]
struct Reconnection {
    delta: i64,
    e: (usize, usize),
    ep: (usize, usize),
    crossed: bool, // false: (a,y),(b,z); true: (a,z),(b,y)
}

impl Reconnection {
    fn tie_key(&self) -> (usize, usize, usize, usize, bool) {
        let (a, b) = norm2(self.e);
        let (y, z) = norm2(self.ep);
        (a, b, y, z, self.crossed)
    }
}

#[inline]
fn norm2(e: (usize, usize)) -> (usize, usize) {
    if e.0 <= e.1 {
        e
    } else {
        (e.1, e.0)
    }
}

/// Repeatedly reconnects the smallest sub-tour with the cheapest 4-tuple
/// exchange until one tour remains. Partner edges come from the top-10
/// candidate view of the removed edge's endpoints; coarser fallbacks keep
/// every step total.
pub fn merge_subtours(inst: &Instance, inter: &mut Intermediate, qt: &QTable) -> Tour {
    let n = inter.adj.len();
    while inter.comp_count > 1 {
        // smallest sub-tour: fewest edges, ties to the lowest component id
        let mut u_comp = u32::MAX;
        let mut best_size = u32::MAX;
        for (cid, mem) in inter.members.iter().enumerate() {
            if !mem.is_empty() && inter.comp_edges[cid] < best_size {
                best_size = inter.comp_edges[cid];
                u_comp = cid as u32;
            }
        }
        let u_edges = subtour_edges(inter, u_comp);

        let mut best: Option<Reconnection> = None;
        fn consider(cand: Reconnection, best: &mut Option<Reconnection>) {
            let better = match best {
                None => true,
                Some(b) => {
                    cand.delta < b.delta
                        || (cand.delta == b.delta && cand.tie_key() < b.tie_key())
                }
            };
            if better {
                *best = Some(cand);
            }
        }
        let eval_pair = |e: (usize, usize),
                         ep: (usize, usize),
                         best: &mut Option<Reconnection>| {
            let (a, b) = e;
            let (y, z) = ep;
            let removed = inst.distance(a, b) + inst.distance(y, z);
            consider(
                Reconnection {
                    delta: inst.distance(a, y) + inst.distance(b, z) - removed,
                    e,
                    ep,
                    crossed: false,
                },
                best,
            );
            consider(
                Reconnection {
                    delta: inst.distance(a, z) + inst.distance(b, y) - removed,
                    e,
                    ep,
                    crossed: true,
                },
                best,
            );
        };

        // level 0: partner edges incident to a top-10 candidate of either
        // endpoint of e
        for &(a, b) in &u_edges {
            for x in [a, b] {
                for c in qt.candidates(x, 10) {
                    let y = c.city;
                    if inter.comp[y] == u_comp {
                        continue;
                    }
                    for slot in 0..2 {
                        let z = inter.adj[y][slot];
                        eval_pair((a, b), (y, z), &mut best);
                    }
                }
            }
        }
        // level 1: every edge of any component containing a top-K candidate
        if best.is_none() {
            let mut target_comps: HashSet<u32> = HashSet::new();
            for &(a, b) in &u_edges {
                for x in [a, b] {
                    for c in qt.candidates(x, qt.k) {
                        if inter.comp[c.city] != u_comp {
                            target_comps.insert(inter.comp[c.city]);
                        }
                    }
                }
            }
            for &tc in &target_comps {
                for ep in subtour_edges(inter, tc) {
                    for &(a, b) in &u_edges {
                        eval_pair((a, b), ep, &mut best);
                    }
                }
            }
        }
        // level 2: full scan (always nonempty when comp_count > 1)
        if best.is_none() {
            for (cid, mem) in inter.members.iter().enumerate() {
                if mem.is_empty() || cid as u32 == u_comp {
                    continue;
                }
                for ep in subtour_edges(inter, cid as u32) {
                    for &(a, b) in &u_edges {
                        eval_pair((a, b), ep, &mut best);
                    }
                }
            }
        }
        let r = best.expect("another sub-tour always provides a partner edge");

        // rewire: remove e=(a,b) and e'=(y,z); add the chosen pairing
        let (a, b) = r.e;
        let (y, z) = r.ep;
        let sa = inter.adj[a].iter().position(|&x| x == b).unwrap();
        let sb = inter.adj[b].iter().position(|&x| x == a).unwrap();
        let sy = inter.adj[y].iter().position(|&x| x == z).unwrap();
        let sz = inter.adj[z].iter().position(|&x| x == y).unwrap();
        if r.crossed {
            inter.adj[a][sa] = z;
            inter.adj[b][sb] = y;
            inter.adj[y][sy] = b;
            inter.adj[z][sz] = a;
        } else {
            inter.adj[a][sa] = y;
            inter.adj[b][sb] = z;
            inter.adj[y][sy] = a;
            inter.adj[z][sz] = b;
        }
        inter.length += r.delta;

        // merge component bookkeeping: relabel the smaller side
        let vc = inter.comp[y];
        let (keep, drop_) =
            if inter.members[u_comp as usize].len() >= inter.members[vc as usize].len() {
                (u_comp, vc)
            } else {
                (vc, u_comp)
            };
        let moved = std::mem::take(&mut inter.members[drop_ as usize]);
        for &m in &moved {
            inter.comp[m as usize] = keep;
        }
        inter.members[keep as usize].extend(moved);
        inter.comp_edges[keep as usize] += inter.comp_edges[drop_ as usize];
        inter.comp_edges[drop_ as usize] = 0;
        inter.comp_count -= 1;
    }

    // read the single cycle out as a tour
    let mut order = Vec::with_capacity(n);
    let mut cur = 0usize;
    let mut prev = NO_EDGE;
    loop {
        order.push(cur);
        let [x, y] = inter.adj[cur];
        let next = if x == y {
            x
        } else if x == prev {
            y
        } else {
            x
        };
        prev = cur;
        cur = next;
        if cur == 0 {
            break;
        }
    }
    let tour = Tour::from_order(inst, order);
    debug_assert_eq!(tour.length(), inter.length, "merge length accounting");
    tour
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EaxStage {
    I,
    II,
}

/// E-set selection state for one parent pair. Stage I draws single unused
/// effective cycles uniformly; stage II grows multi-cycle E-sets around
/// rotating seeds, greedily minimizing the resulting sub-tour count.
pub struct EsetSelector {
    /// effective cycle indices in stage-I draw order (pre-shuffled)
    stage1_order: Vec<usize>,
    stage1_next: usize,
    /// effective cycle indices sorted by B-edge count descending
    stage2_seeds: Vec<usize>,
    stage2_next: usize,
}

impl EsetSelector {
    pub fn new<R: Rng>(cycles: &[AbCycle], rng: &mut R) -> EsetSelector {
        let mut effective: Vec<usize> = (0..cycles.len())
            .filter(|&i| cycles[i].is_effective())
            .collect();
        let mut stage2_seeds = effective.clone();
        stage2_seeds.sort_by(|&x, &y| {
            (cycles[y].len() / 2)
                .cmp(&(cycles[x].len() / 2))
                .then(x.cmp(&y))
        });
        effective.shuffle(rng);
        EsetSelector {
            stage1_order: effective,
            stage1_next: 0,
            stage2_seeds,
            stage2_next: 0,
        }
    }

    pub fn effective_count(&self) -> usize {
        self.stage1_order.len()
    }

    /// One unused effective cycle, uniformly at random; None when exhausted.
    pub fn stage1(&mut self) -> Option<Vec<usize>> {
        if self.stage1_next >= self.stage1_order.len() {
            return None;
        }
        let c = self.stage1_order[self.stage1_next];
        self.stage1_next += 1;
        Some(vec![c])
    }

    /// A multi-cycle E-set: seed with a maximal-B-count cycle (rotating so
    /// offspring within one batch differ), then greedily add vertex-sharing
    /// cycles that minimize the estimated sub-tour count, until the E-set
    /// covers a `beta` fraction of the effective cycles.
    pub fn block2(&mut self, pa: &Tour, cycles: &[AbCycle], beta: f64) -> Option<Vec<usize>> {
        let eff = &self.stage2_seeds;
        if eff.is_empty() {
            return None;
        }
        let seed = eff[self.stage2_next % eff.len()];
        self.stage2_next += 1;

        let target = ((beta * eff.len() as f64).ceil() as usize).max(1);
        let mut selected = vec![seed];
        let mut in_sel = vec![false; cycles.len()];
        in_sel[seed] = true;
        let mut covered: HashSet<usize> = cycles[seed].verts.iter().copied().collect();

        while selected.len() < target {
            let mut best: Option<(usize, usize)> = None; // (subtours, cycle idx)
            for &c in eff {
                if in_sel[c] || !cycles[c].verts.iter().any(|v| covered.contains(v)) {
                    continue;
                }
                selected.push(c);
                let subtours = estimated_subtours(pa, cycles, &selected);
                selected.pop();
                let better = match best {
                    None => true,
                    Some((bs, bc)) => {
                        subtours < bs
                            || (subtours == bs
                                && (cycles[c].len() > cycles[bc].len()
                                    || (cycles[c].len() == cycles[bc].len() && c < bc)))
                    }
                };
                if better {
                    best = Some((subtours, c));
                }
            }
            match best {
                Some((_, c)) => {
                    in_sel[c] = true;
                    selected.push(c);
                    covered.extend(cycles[c].verts.iter().copied());
                }
                None => break, // no vertex-sharing cycle remains
            }
        }
        Some(selected)
    }
}

/// Exact sub-tour count of the intermediate induced by `selected`, via arc
/// contraction: the selected A-edges cut parent A into arcs, and the
/// selected B-edges connect them.
fn estimated_subtours(pa: &Tour, cycles: &[AbCycle], selected: &[usize]) -> usize {
    let n = pa.n();
    let mut cuts: Vec<usize> = Vec::new();
    for &ci in selected {
        for (u, v, label) in cycles[ci].edges() {
            if label == EdgeLabel::A {
                let (pu, pv) = (pa.position(u), pa.position(v));
                cuts.push(if (pu + 1) % n == pv { pu } else { pv });
            }
        }
    }
    if cuts.is_empty() {
        return 1;
    }
    cuts.sort_unstable();
    let m = cuts.len();
    // arcs span positions (cuts[j], cuts[j+1]] cyclically
    let arc_of = |pos: usize| -> usize {
        let idx = cuts.partition_point(|&q| q < pos);
        if idx == 0 || idx == m {
            m - 1 // wrap arc (cuts[m-1], cuts[0]]
        } else {
            idx - 1
        }
    };
    let mut uf: Vec<usize> = (0..m).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        let mut c = x;
        while uf[c] != r {
            let nx = uf[c];
            uf[c] = r;
            c = nx;
        }
        r
    }
    let mut comps = m;
    for &ci in selected {
        for (u, v, label) in cycles[ci].edges() {
            if label == EdgeLabel::B {
                let ra = find(&mut uf, arc_of(pa.position(u)));
                let rb = find(&mut uf, arc_of(pa.position(v)));
                if ra != rb {
                    uf[ra] = rb;
                    comps -= 1;
                }
            }
        }
    }
    comps
}

/// Generates up to `n_ch` offspring of (pa, pb) with the stage-appropriate
/// E-set selection. Identical parents yield no offspring.
#[allow(clippy::too_many_arguments)]
pub fn eax_crossover<R: Rng>(
    inst: &Instance,
    pa: &Tour,
    pb: &Tour,
    stage: EaxStage,
    n_ch: usize,
    beta: f64,
    qt: &QTable,
    rng: &mut R,
) -> Vec<Tour> {
    let g = AbGraph::new(pa, pb);
    let cycles = partition_ab_cycles(&g, rng);
    let mut selector = EsetSelector::new(&cycles, rng);
    let mut out = Vec::new();
    for _ in 0..n_ch {
        let eset = match stage {
            EaxStage::I => selector.stage1(),
            EaxStage::II => selector.block2(pa, &cycles, beta),
        };
        let Some(eset) = eset else { break };
        let mut inter = apply_eset(inst, pa, &cycles, &eset);
        let child = merge_subtours(inst, &mut inter, qt);
        debug_assert!(child.validate().is_ok());
        out.push(child);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurvivorRule {
    /// Length improvement per unit of population edge entropy lost.
    Entropy,
    /// Plain shortest-length selection (ablation mode).
    Length,
}

/// The population plus its edge-frequency counts for entropy evaluation.
pub struct Population {
    pub individuals: Vec<Tour>,
    edge_freq: HashMap<(u32, u32), u32>,
}

#[inline]
fn edge_key(u: usize, v: usize) -> (u32, u32) {
    if u < v {
        (u as u32, v as u32)
    } else {
        (v as u32, u as u32)
    }
}

fn tour_edges(t: &Tour) -> impl Iterator<Item = (u32, u32)> + '_ {
    let n = t.n();
    (0..n).map(move |k| {
        let a = t.city_at(k);
        let b = t.city_at(if k + 1 == n { 0 } else { k + 1 });
        edge_key(a, b)
    })
}

impl Population {
    /// `count` independent greedy 2-opt tours.
    pub fn init<R: Rng>(inst: &Instance, count: usize, qt: &QTable, rng: &mut R) -> Population {
        assert!(count >= 2);
        let individuals: Vec<Tour> =
            (0..count).map(|_| greedy_2opt_init(inst, qt, rng)).collect();
        let mut edge_freq = HashMap::new();
        for t in &individuals {
            for e in tour_edges(t) {
                *edge_freq.entry(e).or_insert(0) += 1;
            }
        }
        Population { individuals, edge_freq }
    }

    pub fn size(&self) -> usize {
        self.individuals.len()
    }

    pub fn freq(&self, u: usize, v: usize) -> u32 {
        self.edge_freq.get(&edge_key(u, v)).copied().unwrap_or(0)
    }

    /// Index of the shortest individual among `slots`.
    pub fn best_of(&self, slots: impl Iterator<Item = usize>) -> usize {
        slots
            .min_by_key(|&i| (self.individuals[i].length(), i))
            .expect("population is never empty")
    }

    /// Replaces the individual in `slot`, keeping edge frequencies current.
    pub fn replace(&mut self, slot: usize, tour: Tour) {
        for e in tour_edges(&self.individuals[slot]) {
            match self.edge_freq.get_mut(&e) {
                Some(f) if *f > 1 => *f -= 1,
                Some(_) => {
                    self.edge_freq.remove(&e);
                }
                None => debug_assert!(false, "edge frequency underflow"),
            }
        }
        for e in tour_edges(&tour) {
            *self.edge_freq.entry(e).or_insert(0) += 1;
        }
        self.individuals[slot] = tour;
    }

    /// Entropy contribution of one edge frequency.
    #[inline]
    fn h(&self, f: u32) -> f64 {
        if f == 0 {
            return 0.0;
        }
        let p = f as f64 / self.size() as f64;
        -p * p.ln()
    }

    /// Entropy decrease caused by swapping the tour in `slot` for
    /// `candidate` (positive means diversity is lost).
    fn entropy_loss(&self, slot: usize, candidate: &Tour) -> f64 {
        let old_edges: HashSet<(u32, u32)> = tour_edges(&self.individuals[slot]).collect();
        let new_edges: HashSet<(u32, u32)> = tour_edges(candidate).collect();
        let mut delta_h = 0.0;
        for &e in old_edges.difference(&new_edges) {
            let f = self.edge_freq.get(&e).copied().unwrap_or(0);
            debug_assert!(f > 0);
            delta_h += self.h(f - 1) - self.h(f);
        }
        for &e in new_edges.difference(&old_edges) {
            let f = self.edge_freq.get(&e).copied().unwrap_or(0);
            delta_h += self.h(f + 1) - self.h(f);
        }
        -delta_h
    }
}

/// Replaces the parent in `slot` with the best length-improving offspring
/// under the survivor rule; keeps the parent when nothing improves. Returns
/// whether a replacement happened.
pub fn select_survivor(
    pop: &mut Population,
    slot: usize,
    offspring: Vec<Tour>,
    rule: SurvivorRule,
) -> bool {
    let parent_len = pop.individuals[slot].length();
    let mut best: Option<(f64, usize)> = None;
    for (i, c) in offspring.iter().enumerate() {
        if c.length() >= parent_len {
            continue;
        }
        let score = match rule {
            SurvivorRule::Length => -(c.length() as f64),
            SurvivorRule::Entropy => {
                let gain = (parent_len - c.length()) as f64;
                let loss = pop.entropy_loss(slot, c);
                gain / loss.max(1e-9)
            }
        };
        let better = match best {
            None => true,
            Some((bs, _)) => score > bs,
        };
        if better {
            best = Some((score, i));
        }
    }
    match best {
        Some((_, i)) => {
            let mut offspring = offspring;
            let chosen = offspring.swap_remove(i);
            pop.replace(slot, chosen);
            true
        }
        None => false,
    }
}
