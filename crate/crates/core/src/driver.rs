//! Solver main loop: per-generation special-individual improvement cases,
//! the crossover generation over a random mating ring, two-stage scheduling
//! with the no-improvement window rule, and every run-configuration variant.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eax::{eax_crossover, select_survivor, EaxStage, Population, SurvivorRule};
use crate::instance::Instance;
use crate::lk::{q_lkh_scratch, KOptScratch};
use crate::one_tree::{alpha_values, ascend_penalties, default_ascent_iters};
use crate::qtable::QTable;
use crate::tour::Tour;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Rhga,
    /// Plain crossover search (no local search, no special individual).
    Eax,
    AlphaEax,
    FixqEax,
    QEax,
    QEaxSpecial,
    EaxLkh,
    AlphaEaxLkh,
    FixqEaxLkh,
    RhgaK,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Variant> {
        Some(match s.to_ascii_lowercase().as_str() {
            "rhga" => Variant::Rhga,
            "eax" => Variant::Eax,
            "alpha-eax" => Variant::AlphaEax,
            "fixq-eax" => Variant::FixqEax,
            "q-eax" => Variant::QEax,
            "q-eax-special" => Variant::QEaxSpecial,
            "eax-lkh" => Variant::EaxLkh,
            "alpha-eax-lkh" => Variant::AlphaEaxLkh,
            "fixq-eax-lkh" => Variant::FixqEaxLkh,
            "rhga-k" => Variant::RhgaK,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Rhga => "rhga",
            Variant::Eax => "eax",
            Variant::AlphaEax => "alpha-eax",
            Variant::FixqEax => "fixq-eax",
            Variant::QEax => "q-eax",
            Variant::QEaxSpecial => "q-eax-special",
            Variant::EaxLkh => "eax-lkh",
            Variant::AlphaEaxLkh => "alpha-eax-lkh",
            Variant::FixqEaxLkh => "fixq-eax-lkh",
            Variant::RhgaK => "rhga-k",
        }
    }

    /// Does the variant run the local search on special individuals at all?
    fn uses_local_search(&self) -> bool {
        !matches!(self, Variant::Eax | Variant::AlphaEax | Variant::FixqEax)
    }

    /// An extra individual appended beyond n_pop (population size n_pop+1).
    fn has_extra_special(&self) -> bool {
        matches!(self, Variant::QEax | Variant::QEaxSpecial)
    }

    /// The reported best excludes the special individual.
    fn result_excludes_special(&self) -> bool {
        matches!(self, Variant::QEax)
    }

    /// Specials may serve as parent B in the mating ring.
    fn special_can_be_pb(&self) -> bool {
        !matches!(self, Variant::QEax | Variant::QEaxSpecial)
    }

    /// Hitting the known optimum on a special individual ends the run.
    fn special_opt_terminates(&self) -> bool {
        !matches!(self, Variant::QEax)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricMode {
    Distance,
    Alpha,
    FixedQ,
    AdaptiveQ,
}

impl MetricMode {
    pub fn parse(s: &str) -> Option<MetricMode> {
        Some(match s.to_ascii_lowercase().as_str() {
            "distance" => MetricMode::Distance,
            "alpha" => MetricMode::Alpha,
            "fixed-q" | "fixedq" => MetricMode::FixedQ,
            "adaptive-q" | "adaptiveq" => MetricMode::AdaptiveQ,
            _ => return None,
        })
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("variant {0} does not admit metric mode {1:?}")]
    BadMetricForVariant(&'static str, MetricMode),
    #[error("special_count must satisfy 1 <= k < n_pop, got {0}")]
    BadSpecialCount(usize),
    #[error("population must hold at least 2 individuals, got {0}")]
    BadPopulation(usize),
    #[error("n_ch must be at least 1")]
    BadNch,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n_pop: usize,
    pub n_ch: usize,
    pub k_max: usize,
    pub lambda: f64,
    pub gamma: f64,
    /// None: 10 * (log10 n - 1) rounded to nearest, floor 1.
    pub m_gen: Option<usize>,
    /// Known optimum; the run stops as soon as it is reached.
    pub opt: Option<i64>,
    pub variant: Variant,
    /// Number of special individuals for the rhga-k variant.
    pub special_count: usize,
    /// None: the variant's own metric.
    pub metric_mode: Option<MetricMode>,
    pub seed: u64,
    #[serde(skip)]
    pub time_limit: Option<Duration>,
    /// Candidate list capacity K.
    pub k_candidates: usize,
    /// Stage-II E-set growth target as a fraction of the effective cycles.
    pub block2_beta: f64,
    #[serde(skip, default = "default_survivor")]
    pub survivor: SurvivorRule,
    /// Include the bootstrap term on the final episode pair (ablation knob).
    pub final_pair_bootstrap: bool,
    /// None: 100 iterations up to n = 10^4, 50 above.
    pub ascent_iters: Option<usize>,
}

fn default_survivor() -> SurvivorRule {
    SurvivorRule::Entropy
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            n_pop: 300,
            n_ch: 30,
            k_max: 5,
            lambda: 0.1,
            gamma: 0.9,
            m_gen: None,
            opt: None,
            variant: Variant::Rhga,
            special_count: 1,
            metric_mode: None,
            seed: 1,
            time_limit: None,
            k_candidates: 25,
            block2_beta: 0.3,
            survivor: SurvivorRule::Entropy,
            final_pair_bootstrap: true,
            ascent_iters: None,
        }
    }
}

/// 10 * (log10 n - 1) rounded to nearest, at least 1.
pub fn auto_m_gen(n: usize) -> usize {
    ((10.0 * ((n as f64).log10() - 1.0)).round() as i64).max(1) as usize
}

impl SolverConfig {
    pub fn resolved_m_gen(&self, n: usize) -> usize {
        self.m_gen.unwrap_or_else(|| auto_m_gen(n)).max(1)
    }

    /// The candidate-ranking metric actually used by the crossover engine,
    /// restricted to the variant matrix.
    pub fn resolved_metric(&self) -> Result<MetricMode, ConfigError> {
        use MetricMode::*;
        use Variant::*;
        let default = match self.variant {
            Rhga | RhgaK | QEax | QEaxSpecial => AdaptiveQ,
            Eax | EaxLkh => Distance,
            AlphaEax | AlphaEaxLkh => Alpha,
            FixqEax | FixqEaxLkh => FixedQ,
        };
        let Some(m) = self.metric_mode else {
            return Ok(default);
        };
        let ok = match self.variant {
            // the plain crossover family admits the three static metrics
            Eax => matches!(m, Distance | Alpha | FixedQ),
            _ => m == default,
        };
        if ok {
            Ok(m)
        } else {
            Err(ConfigError::BadMetricForVariant(self.variant.name(), m))
        }
    }

    fn specials(&self) -> usize {
        match self.variant {
            Variant::RhgaK => self.special_count,
            Variant::Eax | Variant::AlphaEax | Variant::FixqEax => 0,
            _ => 1,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.n_pop < 2 {
            return Err(ConfigError::BadPopulation(self.n_pop));
        }
        if self.n_ch == 0 {
            return Err(ConfigError::BadNch);
        }
        if self.variant == Variant::RhgaK
            && (self.special_count == 0 || self.special_count >= self.n_pop)
        {
            return Err(ConfigError::BadSpecialCount(self.special_count));
        }
        self.resolved_metric()?;
        Ok(())
    }
}

/// Two-stage scheduling. Within a stage, the first time the best length
/// stalls over a whole window of 1500/n_ch generations fixes Gen (the
/// generation count at that moment); the stage then ends once the best
/// stays flat for Gen/10 further generations. Stage I switches to stage II,
/// stage II terminates the run.
#[derive(Debug, Clone)]
pub struct StageState {
    stage: EaxStage,
    window: usize,
    gen_in_stage: usize,
    last_improve: usize,
    gen_fixed: Option<usize>,
    g_max: usize,
    best_len: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageDecision {
    Continue,
    SwitchedToStageTwo,
    Terminate,
}

impl StageState {
    pub fn new(n_ch: usize, initial_best: i64) -> StageState {
        StageState {
            stage: EaxStage::I,
            window: (1500 / n_ch.max(1)).max(1),
            gen_in_stage: 0,
            last_improve: 0,
            gen_fixed: None,
            g_max: 0,
            best_len: initial_best,
        }
    }

    pub fn stage(&self) -> EaxStage {
        self.stage
    }

    pub fn step(&mut self, best: i64) -> StageDecision {
        self.gen_in_stage += 1;
        if best < self.best_len {
            self.best_len = best;
            self.last_improve = self.gen_in_stage;
        }
        if self.gen_fixed.is_none() {
            if self.gen_in_stage - self.last_improve >= self.window {
                self.gen_fixed = Some(self.gen_in_stage);
                self.g_max = (self.gen_in_stage / 10).max(1);
            }
            return StageDecision::Continue;
        }
        let anchor = self.last_improve.max(self.gen_fixed.unwrap());
        if self.gen_in_stage - anchor >= self.g_max {
            match self.stage {
                EaxStage::I => {
                    let window = self.window;
                    let carry = self.best_len;
                    *self = StageState {
                        stage: EaxStage::II,
                        window,
                        gen_in_stage: 0,
                        last_improve: 0,
                        gen_fixed: None,
                        g_max: 0,
                        best_len: carry,
                    };
                    StageDecision::SwitchedToStageTwo
                }
                EaxStage::II => StageDecision::Terminate,
            }
        } else {
            StageDecision::Continue
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub best_order: Vec<usize>,
    pub best_length: i64,
    pub generations: u64,
    pub wall_time_s: f64,
    pub q_lkh_calls: u64,
    /// (generation, best length) per generation, starting at generation 0.
    pub trace: Vec<(u64, i64)>,
    pub time_limit_hit: bool,
    /// Final candidate table (for debugging dumps).
    #[serde(skip)]
    pub q_table: Option<QTable>,
}

impl RunResult {
    pub fn best_tour(&self, inst: &Instance) -> Tour {
        Tour::from_order(inst, self.best_order.clone())
    }
}

struct Tables {
    eax: QTable,
    /// Separate local-search table; None means shared with `eax`.
    lk: Option<QTable>,
}

fn build_tables(inst: &Instance, cfg: &SolverConfig) -> Result<Tables, ConfigError> {
    let metric = cfg.resolved_metric()?;
    let k = cfg.k_candidates;
    // the local-search side of the no-learning hybrid keeps alpha ranking
    let lk_is_alpha = matches!(cfg.variant, Variant::EaxLkh);
    let needs_alpha = lk_is_alpha || !matches!(metric, MetricMode::Distance);

    let alpha_and_bound = if needs_alpha {
        let iters = cfg
            .ascent_iters
            .unwrap_or_else(|| default_ascent_iters(inst.n));
        let (pen, bound) = ascend_penalties(inst, iters);
        Some((alpha_values(inst, &pen, k), bound))
    } else {
        None
    };

    let eax = match metric {
        MetricMode::Distance => QTable::rank_by_distance(inst, k),
        MetricMode::Alpha => {
            let (alpha, _) = alpha_and_bound.as_ref().unwrap();
            QTable::rank_by_alpha(alpha, k)
        }
        MetricMode::FixedQ | MetricMode::AdaptiveQ => {
            let (alpha, bound) = alpha_and_bound.as_ref().unwrap();
            QTable::init_q(inst, alpha, *bound, k)
        }
    };
    let lk = if lk_is_alpha {
        let (alpha, _) = alpha_and_bound.as_ref().unwrap();
        Some(QTable::rank_by_alpha(alpha, k))
    } else {
        None
    };
    Ok(Tables { eax, lk })
}

/// Runs the configured solver once. All randomness is derived from
/// `cfg.seed`, so equal configurations give bit-identical results.
pub fn rhga_run(inst: &Instance, cfg: &SolverConfig) -> Result<RunResult, ConfigError> {
    cfg.validate()?;
    let start = Instant::now();
    let metric = cfg.resolved_metric()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tables = build_tables(inst, cfg)?;

    let specials = cfg.specials();
    let total = cfg.n_pop + usize::from(cfg.variant.has_extra_special());
    let uses_ls = cfg.variant.uses_local_search() && specials > 0;
    // Q-values are learned only in the adaptive configurations
    let lambda = if metric == MetricMode::AdaptiveQ {
        cfg.lambda
    } else {
        0.0
    };
    let m_gen = cfg.resolved_m_gen(inst.n);

    let mut pop = Population::init(inst, total, &tables.eax, &mut rng);
    let mut scratch = KOptScratch::new(inst.n);
    let mut l_old = vec![i64::MAX; specials];
    let mut l_best_old = i64::MAX;
    let mut num = vec![0usize; specials];
    let mut q_lkh_calls = 0u64;
    let mut generations = 0u64;
    let mut time_limit_hit = false;

    let result_first = if cfg.variant.result_excludes_special() {
        specials
    } else {
        0
    };
    let reported_best =
        |pop: &Population| -> i64 { pop.individuals[pop.best_of(result_first..total)].length() };

    let mut trace: Vec<(u64, i64)> = vec![(0, reported_best(&pop))];
    let mut stage = StageState::new(cfg.n_ch, reported_best(&pop));

    loop {
        // population best outside the specials
        let xb_slot = pop.best_of(specials..total);
        let xb_len = pop.individuals[xb_slot].length();

        if let Some(opt) = cfg.opt {
            let special_hit = cfg.variant.special_opt_terminates()
                && (0..specials).any(|s| pop.individuals[s].length() == opt);
            if special_hit || xb_len == opt {
                break;
            }
        }
        if let Some(limit) = cfg.time_limit {
            if start.elapsed() >= limit {
                time_limit_hit = true;
                break;
            }
        }

        for v in num.iter_mut() {
            *v += 1;
        }
        if uses_ls {
            // Case 1: a special was just initialized or improved by the
            // crossover engine since its last local search
            for s in 0..specials {
                if pop.individuals[s].length() < l_old[s] {
                    let mut t = pop.individuals[s].clone();
                    run_lk(inst, &mut t, &mut tables, cfg, lambda, &mut rng, &mut scratch);
                    q_lkh_calls += 1;
                    l_old[s] = t.length();
                    num[s] = 0;
                    pop.replace(s, t);
                }
            }
            // Case 2: a fresh population best undercuts every special
            let best_special = (0..specials)
                .map(|s| pop.individuals[s].length())
                .min()
                .unwrap_or(i64::MAX);
            if xb_len < best_special && xb_len < l_best_old {
                l_best_old = xb_len;
                let mut t = pop.individuals[xb_slot].clone();
                run_lk(inst, &mut t, &mut tables, cfg, lambda, &mut rng, &mut scratch);
                q_lkh_calls += 1;
                if t.length() < xb_len {
                    l_old[0] = t.length();
                    num[0] = 0;
                    pop.replace(0, t);
                }
            }
            // Case 3: a special has stalled for m_gen generations
            for s in 0..specials {
                if num[s] >= m_gen {
                    let r = specials + rng.random_range(0..(total - specials));
                    let mut t = pop.individuals[r].clone();
                    run_lk(inst, &mut t, &mut tables, cfg, lambda, &mut rng, &mut scratch);
                    q_lkh_calls += 1;
                    num[s] = 0;
                    if t.length() < pop.individuals[s].length() {
                        l_old[s] = t.length();
                        pop.replace(s, t);
                    }
                }
            }
        }

        // one crossover generation over a random mating ring
        generations += 1;
        let eax_stage = stage.stage();
        if cfg.variant.special_can_be_pb() {
            let mut rp: Vec<usize> = (0..total).collect();
            rp.shuffle(&mut rng);
            for i in 0..rp.len() {
                let a_slot = rp[i];
                let b_slot = rp[(i + 1) % rp.len()];
                mate(inst, &mut pop, a_slot, b_slot, eax_stage, cfg, &tables.eax, &mut rng);
            }
        } else {
            // specials serve only as parent A, each against a random
            // regular partner; the regulars mate in their own ring
            for s in 0..specials {
                let partner = specials + rng.random_range(0..(total - specials));
                mate(inst, &mut pop, s, partner, eax_stage, cfg, &tables.eax, &mut rng);
            }
            let mut rp: Vec<usize> = (specials..total).collect();
            rp.shuffle(&mut rng);
            for i in 0..rp.len() {
                let a_slot = rp[i];
                let b_slot = rp[(i + 1) % rp.len()];
                mate(inst, &mut pop, a_slot, b_slot, eax_stage, cfg, &tables.eax, &mut rng);
            }
        }

        let cur_best = reported_best(&pop);
        trace.push((generations, cur_best));
        match stage.step(cur_best) {
            StageDecision::Continue | StageDecision::SwitchedToStageTwo => {}
            StageDecision::Terminate => break,
        }
    }

    let best_slot = pop.best_of(result_first..total);
    let best = &pop.individuals[best_slot];
    debug_assert!(best.validate().is_ok());
    Ok(RunResult {
        best_order: best.order().to_vec(),
        best_length: best.length(),
        generations,
        wall_time_s: start.elapsed().as_secs_f64(),
        q_lkh_calls,
        trace,
        time_limit_hit,
        q_table: Some(tables.eax),
    })
}

/// rhga-k entry point: `k` special individuals bridge the population and
/// the local search.
pub fn rhga_k_run(inst: &Instance, cfg: &SolverConfig, k: usize) -> Result<RunResult, ConfigError> {
    let mut cfg = cfg.clone();
    cfg.variant = Variant::RhgaK;
    cfg.special_count = k;
    rhga_run(inst, &cfg)
}

#[allow(clippy::too_many_arguments)]
fn mate<R: Rng>(
    inst: &Instance,
    pop: &mut Population,
    a_slot: usize,
    b_slot: usize,
    stage: EaxStage,
    cfg: &SolverConfig,
    qt: &QTable,
    rng: &mut R,
) -> bool {
    if a_slot == b_slot {
        return false;
    }
    let pa = pop.individuals[a_slot].clone();
    let pb = pop.individuals[b_slot].clone();
    let kids = eax_crossover(inst, &pa, &pb, stage, cfg.n_ch, cfg.block2_beta, qt, rng);
    select_survivor(pop, a_slot, kids, cfg.survivor)
}

fn run_lk<R: Rng>(
    inst: &Instance,
    tour: &mut Tour,
    tables: &mut Tables,
    cfg: &SolverConfig,
    lambda: f64,
    rng: &mut R,
    scratch: &mut KOptScratch,
) {
    let qt = tables.lk.as_mut().unwrap_or(&mut tables.eax);
    q_lkh_scratch(
        inst,
        tour,
        qt,
        cfg.k_max,
        lambda,
        cfg.gamma,
        cfg.final_pair_bootstrap,
        rng,
        scratch,
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Metric;
    use crate::oracle::exact_dp;
    use rand::Rng as _;

    fn random_instance(n: usize, seed: u64, span: f64) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coords = (0..n)
            .map(|_| (rng.random_range(0.0..span), rng.random_range(0.0..span)))
            .collect();
        Instance::from_coords(&format!("drv{n}-{seed}"), Metric::Euc2d, coords)
    }

    fn small_cfg(variant: Variant, seed: u64) -> SolverConfig {
        SolverConfig {
            n_pop: 12,
            n_ch: 6,
            variant,
            seed,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn m_gen_auto_formula() {
        assert_eq!(auto_m_gen(1000), 20);
        assert_eq!(auto_m_gen(10_000), 30);
        assert_eq!(auto_m_gen(100_000), 40);
        assert_eq!(auto_m_gen(10), 1);
        assert_eq!(auto_m_gen(5), 1);
        // spot value between decades
        assert_eq!(auto_m_gen(3162), 25);
    }

    #[test]
    fn stage_rule_hand_simulation() {
        // constant best from the start, n_ch = 30: window is 50, Gen fixes
        // at generation 50, the stage ends 5 generations later
        let mut st = StageState::new(30, 100);
        assert_eq!(st.window, 50);
        for g in 1..55 {
            assert_eq!(st.step(100), StageDecision::Continue, "gen {g}");
        }
        assert_eq!(st.step(100), StageDecision::SwitchedToStageTwo);
        assert_eq!(st.stage(), EaxStage::II);
        // stage II recomputes Gen and G_max from scratch
        for g in 1..55 {
            assert_eq!(st.step(100), StageDecision::Continue, "II gen {g}");
        }
        assert_eq!(st.step(100), StageDecision::Terminate);
    }

    #[test]
    fn stage_never_switches_while_improving() {
        let mut st = StageState::new(30, 1_000_000);
        let mut best = 1_000_000i64;
        for _ in 0..500 {
            best -= 1;
            assert_eq!(st.step(best), StageDecision::Continue);
        }
        assert_eq!(st.stage(), EaxStage::I);
    }

    #[test]
    fn stage_improvement_after_fix_extends_stage() {
        let mut st = StageState::new(30, 100);
        for _ in 1..=50 {
            st.step(100);
        }
        assert!(st.gen_fixed.is_some());
        assert_eq!(st.g_max, 5);
        // an improvement right after Gen is fixed restarts the flat counter
        assert_eq!(st.step(99), StageDecision::Continue); // gen 51
        for g in 52..56 {
            assert_eq!(st.step(99), StageDecision::Continue, "gen {g}");
        }
        assert_eq!(st.step(99), StageDecision::SwitchedToStageTwo); // gen 56
    }

    #[test]
    fn run_reaches_exact_optimum_on_small_instance() {
        let inst = random_instance(8, 3, 1000.0);
        let opt = exact_dp(&inst).unwrap().optimal_length;
        let cfg = SolverConfig {
            opt: Some(opt),
            ..small_cfg(Variant::Rhga, 5)
        };
        let r = rhga_run(&inst, &cfg).unwrap();
        assert_eq!(r.best_length, opt);
        let t = r.best_tour(&inst);
        assert!(t.validate().is_ok());
        assert_eq!(t.length(), opt);
    }

    #[test]
    fn eax_only_never_calls_local_search() {
        let inst = random_instance(30, 4, 2000.0);
        let cfg = SolverConfig {
            m_gen: Some(3),
            ..small_cfg(Variant::Eax, 7)
        };
        let r = rhga_run(&inst, &cfg).unwrap();
        assert_eq!(r.q_lkh_calls, 0);
        assert!(r.generations > 0);
    }

    #[test]
    fn determinism_same_seed_same_trace() {
        let inst = random_instance(25, 8, 1500.0);
        for variant in [Variant::Rhga, Variant::Eax, Variant::QEax, Variant::EaxLkh] {
            let cfg = small_cfg(variant, 42);
            let a = rhga_run(&inst, &cfg).unwrap();
            let b = rhga_run(&inst, &cfg).unwrap();
            assert_eq!(a.trace, b.trace, "{variant:?}");
            assert_eq!(a.best_order, b.best_order, "{variant:?}");
            assert_eq!(a.q_lkh_calls, b.q_lkh_calls, "{variant:?}");
        }
    }

    #[test]
    fn trace_is_nonincreasing() {
        let inst = random_instance(40, 12, 2500.0);
        for variant in [Variant::Rhga, Variant::Eax] {
            let r = rhga_run(&inst, &small_cfg(variant, 3)).unwrap();
            for w in r.trace.windows(2) {
                assert!(w[1].1 <= w[0].1, "{variant:?}: best increased");
            }
        }
    }

    #[test]
    fn never_reports_below_known_optimum() {
        for seed in 0..5 {
            let inst = random_instance(9, 60 + seed, 800.0);
            let opt = exact_dp(&inst).unwrap().optimal_length;
            let cfg = SolverConfig {
                opt: Some(opt),
                ..small_cfg(Variant::Rhga, seed)
            };
            let r = rhga_run(&inst, &cfg).unwrap();
            assert!(r.best_length >= opt);
        }
    }

    #[test]
    fn rhga_k1_identical_to_rhga() {
        let inst = random_instance(22, 19, 1200.0);
        let base = small_cfg(Variant::Rhga, 77);
        let a = rhga_run(&inst, &base).unwrap();
        let b = rhga_k_run(&inst, &base, 1).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best_order, b.best_order);
        assert_eq!(a.q_lkh_calls, b.q_lkh_calls);
    }

    #[test]
    fn rhga_k_more_specials_more_lk_calls() {
        let inst = random_instance(60, 21, 4000.0);
        let mk = |k: usize| SolverConfig {
            n_pop: 20,
            n_ch: 8,
            m_gen: Some(2),
            variant: Variant::RhgaK,
            special_count: k,
            seed: 5,
            ..SolverConfig::default()
        };
        let one = rhga_run(&inst, &mk(1)).unwrap();
        let five = rhga_run(&inst, &mk(5)).unwrap();
        assert!(
            five.q_lkh_calls > one.q_lkh_calls,
            "k=5 made {} calls vs k=1 {}",
            five.q_lkh_calls,
            one.q_lkh_calls
        );
    }

    #[test]
    fn special_count_knob_inert_for_eax_only() {
        let inst = random_instance(20, 30, 900.0);
        let mut a_cfg = small_cfg(Variant::Eax, 9);
        a_cfg.m_gen = Some(2);
        let mut b_cfg = a_cfg.clone();
        b_cfg.special_count = 5;
        let a = rhga_run(&inst, &a_cfg).unwrap();
        let b = rhga_run(&inst, &b_cfg).unwrap();
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn q_eax_special_reports_at_least_as_good() {
        // identical dynamics, the only difference is whether the special
        // individual may be reported
        let inst = random_instance(30, 31, 2000.0);
        let a = rhga_run(&inst, &small_cfg(Variant::QEax, 11)).unwrap();
        let b = rhga_run(&inst, &small_cfg(Variant::QEaxSpecial, 11)).unwrap();
        assert!(b.best_length <= a.best_length);
        assert_eq!(a.generations, b.generations);
    }

    #[test]
    fn time_limit_zero_returns_immediately() {
        let inst = random_instance(30, 32, 2000.0);
        let cfg = SolverConfig {
            time_limit: Some(Duration::from_secs(0)),
            ..small_cfg(Variant::Rhga, 2)
        };
        let r = rhga_run(&inst, &cfg).unwrap();
        assert!(r.time_limit_hit);
        assert_eq!(r.generations, 0);
        assert!(r.best_tour(&inst).validate().is_ok());
    }

    #[test]
    fn metric_matrix_rejections() {
        let mut cfg = SolverConfig {
            metric_mode: Some(MetricMode::Distance),
            ..SolverConfig::default()
        };
        assert!(matches!(
            cfg.resolved_metric(),
            Err(ConfigError::BadMetricForVariant("rhga", MetricMode::Distance))
        ));
        cfg.variant = Variant::Eax;
        assert_eq!(cfg.resolved_metric().unwrap(), MetricMode::Distance);
        cfg.metric_mode = Some(MetricMode::AdaptiveQ);
        assert!(cfg.resolved_metric().is_err());
        cfg.metric_mode = Some(MetricMode::FixedQ);
        assert_eq!(cfg.resolved_metric().unwrap(), MetricMode::FixedQ);
        cfg.variant = Variant::AlphaEaxLkh;
        cfg.metric_mode = Some(MetricMode::Alpha);
        assert_eq!(cfg.resolved_metric().unwrap(), MetricMode::Alpha);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in [
            Variant::Rhga,
            Variant::Eax,
            Variant::AlphaEax,
            Variant::FixqEax,
            Variant::QEax,
            Variant::QEaxSpecial,
            Variant::EaxLkh,
            Variant::AlphaEaxLkh,
            Variant::FixqEaxLkh,
            Variant::RhgaK,
        ] {
            assert_eq!(Variant::parse(v.name()), Some(v));
        }
        assert_eq!(Variant::parse("nope"), None);
    }
}
