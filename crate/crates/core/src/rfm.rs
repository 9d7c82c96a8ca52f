//! RFM(d,p): two-stage frog paths with killing.
//!
//! A woken frog first climbs (each step to the parent with probability rho)
//! and, at its first step away from the root, switches for good to moving
//! down to uniform children. It is removed on reaching the root (after the
//! visit is counted) and on stepping down onto an already visited site. The
//! initially awake frog starts in the down stage at the root.
//!
//! Two sources of randomness drive the same engine:
//!
//! * [`RfmDriver::Stacks`]: per-site instruction stacks U(v), D(v). The
//!   final counts of a finished run then do not depend on the scheduler.
//! * [`RfmDriver::LoopErased`]: each frog follows the downward loop erasure
//!   of the FM(d,p) walk it would take from its birth site (the same walks
//!   as [`crate::fm::run_fm`]). This realizes RFM on the randomness of FM,
//!   which is what the pathwise chain RFM <= FM′ <= FM compares.
//!
//! Down-steps that would leave the sleeper region are culled: below the last
//! sleeper level a down-moving frog can neither wake anyone nor return.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::model::{fm_step_from_word, ModelParams, Step, Vertex};
use crate::rng::{substream, unit_f64, KeyedStream, StreamKind};
use crate::runner::run_trials;
use crate::schedule::AwakeSet;
use crate::sim::{KillHistogram, KillReason, SimConfig, TrialOutcome, Truncation};
use crate::stacks::{down_instruction, up_instruction};
use crate::tree::{LazyTree, NodeId, ROOT};

/// Extra removals layered on top of the RFM rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EarlyRemovalPolicy {
    None,
    /// Each newly woken frog is removed with probability q.
    RandomBernoulli(f64),
    /// Frogs woken at these vertices are removed on waking.
    SiteList(BTreeSet<Vertex>),
    /// Frogs woken anywhere in the subtrees of these vertices are removed on
    /// waking.
    SubtreeList(Vec<Vertex>),
    /// A frog stepping down onto an unvisited site is removed instead with
    /// probability `table[S]`, where S is the number of sleeping children
    /// of the vertex it leaves.
    ExtraKill(Vec<f64>),
}

impl EarlyRemovalPolicy {
    fn validate(&self, d: u32) -> Result<()> {
        match self {
            Self::RandomBernoulli(q) => check_probability("removal probability", *q).map(|_| ()),
            Self::ExtraKill(table) => {
                if table.len() <= d as usize {
                    return Err(Error::Config(format!(
                        "extra-kill table needs {} entries, got {}",
                        d + 1,
                        table.len()
                    )));
                }
                table
                    .iter()
                    .try_for_each(|&q| check_probability("extra-kill probability", q).map(|_| ()))
            }
            _ => Ok(()),
        }
    }

    fn removes_on_wake(&self, v: impl FnOnce() -> Vertex, coin: impl FnOnce() -> f64) -> bool {
        match self {
            Self::None | Self::ExtraKill(_) => false,
            Self::RandomBernoulli(q) => coin() < *q,
            Self::SiteList(sites) => sites.contains(&v()),
            Self::SubtreeList(roots) => {
                let v = v();
                roots.iter().any(|r| v.is_descendant_of(r))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RfmDriver {
    #[default]
    Stacks,
    LoopErased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RfmStage {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RfmSite {
    pub visited: bool,
    pub sleeper: bool,
    pub visits: u64,
    /// Children of this vertex still holding a sleeper.
    pub sleeping_children: u32,
    up_used: u64,
    down_used: u64,
    extra_used: u64,
}

/// Loop-erased FM walk: `ups` parent steps, then the child indices in `downs`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct ErasedPath {
    pub ups: u32,
    pub downs: Vec<u8>,
    cursor: usize,
}

impl ErasedPath {
    fn next(&mut self) -> Option<Step> {
        if self.ups > 0 {
            self.ups -= 1;
            return Some(Step::Parent);
        }
        let k = *self.downs.get(self.cursor)?;
        self.cursor += 1;
        Some(Step::Child(k))
    }
}

/// Downward loop erasure of the FM walk of the frog born at depth
/// `birth_depth` with walk stream `walk`. The walk runs until it reaches
/// the root (from below), steps past `depth_cap`, or takes `max_steps` steps.
pub(crate) fn erase_walk(
    params: &ModelParams,
    walk: KeyedStream,
    birth_depth: u32,
    depth_cap: u32,
    max_steps: u64,
) -> ErasedPath {
    let mut depth = birth_depth;
    let mut ups = 0u32;
    let mut downs: Vec<u8> = Vec::new();
    for i in 0..max_steps {
        match fm_step_from_word(depth == 0, params, walk.word(i)) {
            Step::Parent => {
                depth -= 1;
                if downs.pop().is_none() {
                    ups += 1;
                    if depth == 0 {
                        break;
                    }
                }
            }
            Step::Child(k) => {
                downs.push(k);
                if depth >= depth_cap {
                    break;
                }
                depth += 1;
            }
        }
    }
    ErasedPath { ups, downs, cursor: 0 }
}

#[derive(Debug, Clone)]
pub(crate) struct RfmFrog {
    pub pos: NodeId,
    pub stage: RfmStage,
    pub alive: bool,
    pub up_steps: u32,
    pub kill: Option<KillReason>,
    path: Option<ErasedPath>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DownOutcome {
    Woke {
        node: NodeId,
        frog: usize,
        removed_on_wake: bool,
    },
    HitVisited {
        node: NodeId,
    },
    ExtraKilled,
    Culled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RfmMove {
    Up {
        to: NodeId,
        hit_root: bool,
    },
    Down {
        from: NodeId,
        child: u8,
        outcome: DownOutcome,
    },
    /// A loop-erased path ran out (its walk hit the step limit).
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RfmEvent {
    pub frog: usize,
    pub mv: RfmMove,
}

pub(crate) struct RfmEngine {
    params: ModelParams,
    depth_cap: u32,
    limit: u32,
    step_cap: u64,
    record_sites: bool,
    trial_seed: u64,
    policy: EarlyRemovalPolicy,
    driver: RfmDriver,
    pub tree: LazyTree<RfmSite>,
    pub frogs: Vec<RfmFrog>,
    awake: AwakeSet,
    rng: ChaCha8Rng,
    pub root_visits: u64,
    pub woken: u64,
    pub steps: u64,
    pub kills: KillHistogram,
    /// Child of the root visited first, and its child visited first.
    first_child: Option<NodeId>,
    first_grandchild: Option<NodeId>,
}

impl RfmEngine {
    pub fn new(config: &SimConfig, policy: &EarlyRemovalPolicy, driver: RfmDriver, trial_seed: u64) -> Result<Self> {
        config.validate()?;
        let d = config.params.d();
        policy.validate(d)?;
        let limit = config.sleeper_limit();
        let root = RfmSite {
            visited: true,
            sleeping_children: if limit >= 1 { d } else { 0 },
            ..RfmSite::default()
        };
        let mut engine = Self {
            params: config.params,
            depth_cap: config.depth_cap,
            limit,
            step_cap: config.step_cap,
            record_sites: config.record_sites,
            trial_seed,
            policy: policy.clone(),
            driver,
            tree: LazyTree::new(d, root),
            frogs: Vec::new(),
            awake: AwakeSet::new(config.policy),
            rng: substream(trial_seed, StreamKind::Scheduler),
            root_visits: 0,
            woken: 0,
            steps: 0,
            kills: KillHistogram::default(),
            first_child: None,
            first_grandchild: None,
        };
        engine.spawn(ROOT, RfmStage::Down);
        Ok(engine)
    }

    /// Deepest level that can hold sleepers.
    pub fn region_depth(&self) -> u32 {
        self.limit.min(self.depth_cap)
    }

    fn site_init(d: u32, limit: u32) -> impl Fn(u32) -> RfmSite {
        move |depth| RfmSite {
            sleeper: depth <= limit,
            sleeping_children: if depth < limit { d } else { 0 },
            ..RfmSite::default()
        }
    }

    fn spawn(&mut self, node: NodeId, stage: RfmStage) -> usize {
        let path = match self.driver {
            RfmDriver::Stacks => None,
            RfmDriver::LoopErased => Some(erase_walk(
                &self.params,
                KeyedStream::new(self.trial_seed, self.tree.path_hash(node), StreamKind::FmWalk),
                self.tree.depth(node),
                self.depth_cap,
                self.step_cap,
            )),
        };
        let id = self.frogs.len();
        self.frogs.push(RfmFrog {
            pos: node,
            stage,
            alive: true,
            up_steps: 0,
            kill: None,
            path,
        });
        self.awake.push(id);
        id
    }

    fn kill(&mut self, f: usize, reason: KillReason) {
        let frog = &mut self.frogs[f];
        debug_assert!(frog.alive);
        frog.alive = false;
        frog.kill = Some(reason);
        self.kills.record(reason);
    }

    fn next_move(&mut self, f: usize) -> Option<Step> {
        let pos = self.frogs[f].pos;
        if let Some(path) = self.frogs[f].path.as_mut() {
            return path.next();
        }
        let hash = self.tree.path_hash(pos);
        let site = self.tree.site_mut(pos);
        Some(match self.frogs[f].stage {
            RfmStage::Up => {
                let i = site.up_used;
                site.up_used += 1;
                up_instruction(self.trial_seed, hash, &self.params, i)
            }
            RfmStage::Down => {
                let i = site.down_used;
                site.down_used += 1;
                Step::Child(down_instruction(self.trial_seed, hash, self.params.d(), i))
            }
        })
    }

    /// Moves frog `f` once.
    pub fn step_frog(&mut self, f: usize) -> RfmEvent {
        self.steps += 1;
        let from = self.frogs[f].pos;
        let Some(step) = self.next_move(f) else {
            self.kill(f, KillReason::DepthCap);
            return RfmEvent {
                frog: f,
                mv: RfmMove::Exhausted,
            };
        };
        let mv = match step {
            Step::Parent => {
                assert_eq!(self.frogs[f].stage, RfmStage::Up, "up-step after a down-step");
                let to = self.tree.parent(from).expect("the root frog never climbs");
                let frog = &mut self.frogs[f];
                frog.pos = to;
                frog.up_steps += 1;
                self.tree.site_mut(to).visits += 1;
                let hit_root = to == ROOT;
                if hit_root {
                    self.root_visits += 1;
                    self.kill(f, KillReason::HitRoot);
                }
                RfmMove::Up { to, hit_root }
            }
            Step::Child(k) => {
                self.frogs[f].stage = RfmStage::Down;
                RfmMove::Down {
                    from,
                    child: k,
                    outcome: self.land(f, from, k),
                }
            }
        };
        RfmEvent { frog: f, mv }
    }

    fn land(&mut self, f: usize, from: NodeId, k: u8) -> DownOutcome {
        if self.tree.depth(from) >= self.region_depth() {
            self.kill(f, KillReason::DepthCap);
            return DownOutcome::Culled;
        }
        let init = Self::site_init(self.params.d(), self.limit);
        let to = self.tree.child_or_insert_with(from, k, init);
        if self.tree.site(to).visited {
            self.tree.site_mut(to).visits += 1;
            self.kill(f, KillReason::HitVisited);
            return DownOutcome::HitVisited { node: to };
        }
        if let EarlyRemovalPolicy::ExtraKill(table) = &self.policy {
            let q = table[self.tree.site(from).sleeping_children as usize];
            let hash = self.tree.path_hash(from);
            let site = self.tree.site_mut(from);
            let i = site.extra_used;
            site.extra_used += 1;
            if KeyedStream::new(self.trial_seed, hash, StreamKind::ExtraKill).unit(i) < q {
                self.kill(f, KillReason::EarlyRemoval);
                return DownOutcome::ExtraKilled;
            }
        }
        self.frogs[f].pos = to;
        let site = self.tree.site_mut(to);
        site.visits += 1;
        site.visited = true;
        debug_assert!(site.sleeper, "unvisited site inside the region holds a sleeper");
        site.sleeper = false;
        self.tree.site_mut(from).sleeping_children -= 1;
        self.woken += 1;
        self.note_first_visits(from, to);
        let g = self.spawn(to, RfmStage::Up);
        let removed = {
            let tree = &self.tree;
            let seed = self.trial_seed;
            self.policy.removes_on_wake(
                || tree.vertex(to),
                || unit_f64(KeyedStream::new(seed, tree.path_hash(to), StreamKind::Removal).word(0)),
            )
        };
        if removed {
            self.kill(g, KillReason::EarlyRemoval);
        }
        DownOutcome::Woke {
            node: to,
            frog: g,
            removed_on_wake: removed,
        }
    }

    fn note_first_visits(&mut self, from: NodeId, to: NodeId) {
        if from == ROOT && self.first_child.is_none() {
            self.first_child = Some(to);
        } else if Some(from) == self.first_child && self.first_grandchild.is_none() {
            self.first_grandchild = Some(to);
        }
    }

    pub fn tick(&mut self) -> Option<RfmEvent> {
        // frogs removed on waking are dropped here
        let f = loop {
            let f = self.awake.take(&mut self.rng)?;
            if self.frogs[f].alive {
                break f;
            }
        };
        let event = self.step_frog(f);
        if self.frogs[f].alive {
            self.awake.push(f);
        }
        Some(event)
    }

    pub fn step_cap_reached(&self) -> bool {
        self.steps >= self.step_cap
    }

    pub fn run_to_end(&mut self) {
        while !self.step_cap_reached() && self.tick().is_some() {}
    }

    /// Entry flags of the siblings of the first visited grandchild, in
    /// coordinate order (the grandchild itself excluded).
    fn sibling_entries(&self) -> Vec<bool> {
        let (Some(bar), Some(x)) = (self.first_child, self.first_grandchild) else {
            return Vec::new();
        };
        let xi = self.tree.child_index(x);
        (1..=self.params.d() as u8)
            .filter(|&k| k != xi)
            .map(|k| self.tree.get_child(bar, k).is_some_and(|c| self.tree.site(c).visited))
            .collect()
    }

    pub fn finish(self) -> RfmRun {
        let per_site_visits = self.record_sites.then(|| {
            self.tree
                .sites()
                .filter(|(_, s)| s.visits > 0)
                .map(|(id, s)| (self.tree.vertex(id), s.visits))
                .collect::<BTreeMap<_, _>>()
        });
        let sibling_entered = self.sibling_entries();
        let capped = !self.awake.is_empty();
        RfmRun {
            outcome: TrialOutcome {
                root_visits: self.root_visits,
                frogs_woken: self.woken,
                steps_used: self.steps,
                truncation: TrialOutcome::classify(capped, &self.kills),
                kills: self.kills,
                per_site_visits,
            },
            first_grandchild: self.first_grandchild.map(|x| self.tree.vertex(x)),
            sibling_entered,
        }
    }
}

/// Result of one RFM run with the subtree-entry bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfmRun {
    pub outcome: TrialOutcome,
    /// First grandchild of the root to be visited (x).
    pub first_grandchild: Option<Vertex>,
    /// For each sibling y of x, whether some frog entered y's subtree.
    pub sibling_entered: Vec<bool>,
}

impl RfmRun {
    /// Whether any sibling subtree of x was entered.
    pub fn a_event(&self) -> bool {
        self.sibling_entered.iter().any(|&e| e)
    }
}

pub fn run_rfm_with(
    config: &SimConfig,
    policy: &EarlyRemovalPolicy,
    driver: RfmDriver,
    trial_seed: u64,
) -> Result<RfmRun> {
    let mut engine = RfmEngine::new(config, policy, driver, trial_seed)?;
    engine.run_to_end();
    Ok(engine.finish())
}

/// One RFM(d,p) trial driven by site instruction stacks.
pub fn run_rfm(config: &SimConfig, policy: &EarlyRemovalPolicy, trial_seed: u64) -> Result<TrialOutcome> {
    run_rfm_with(config, policy, RfmDriver::Stacks, trial_seed).map(|r| r.outcome)
}

/// One RFM(d,p) trial realized on the FM(d,p) walks of the same trial seed.
pub fn run_rfm_loop_erased(config: &SimConfig, trial_seed: u64) -> Result<TrialOutcome> {
    run_rfm_with(config, &EarlyRemovalPolicy::None, RfmDriver::LoopErased, trial_seed).map(|r| r.outcome)
}

/// A sample of the truncated root-visit count V_t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VtSample {
    pub t: u32,
    pub v: u64,
    /// Some sibling subtree of the first visited grandchild was entered
    /// (for d = 2 this is the single sibling y).
    pub a_event: bool,
    pub sibling_entered: Vec<bool>,
    pub per_site_visits: Option<BTreeMap<Vertex, u64>>,
    pub truncation: Truncation,
}

/// Configuration behind [`sample_vt`]: sleepers on levels `1..=t+1`, i.e.
/// `t` counts the sleeper levels strictly below the root's first child.
pub fn vt_config(t: u32, params: ModelParams, step_cap: u64) -> SimConfig {
    SimConfig::new(params, t + 1, step_cap).with_sleeper_depth(t + 1)
}

pub fn sample_vt(t: u32, params: ModelParams, step_cap: u64, trial_seed: u64) -> Result<VtSample> {
    let config = vt_config(t, params, step_cap);
    let run = run_rfm_with(&config, &EarlyRemovalPolicy::None, RfmDriver::Stacks, trial_seed)?;
    Ok(VtSample {
        t,
        v: run.outcome.root_visits,
        a_event: run.a_event(),
        sibling_entered: run.sibling_entered,
        per_site_visits: run.outcome.per_site_visits,
        truncation: run.outcome.truncation,
    })
}

/// Mean arrivals per site over `trials` runs.
pub fn visits_profile(
    config: &SimConfig,
    policy: &EarlyRemovalPolicy,
    trials: u64,
    master_seed: u64,
) -> Result<BTreeMap<Vertex, f64>> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let config = config.recording_sites();
    let runs = run_trials(trials, master_seed, |_, seed| run_rfm(&config, policy, seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut totals: BTreeMap<Vertex, u64> = BTreeMap::new();
    for run in &runs {
        for (v, n) in run.per_site_visits.as_ref().expect("recording enabled") {
            *totals.entry(v.clone()).or_default() += n;
        }
    }
    Ok(totals.into_iter().map(|(v, n)| (v, n as f64 / trials as f64)).collect())
}

/// Root visits of RFM (loop-erased), FM′ and FM on one trial seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutcome {
    pub rfm: TrialOutcome,
    pub fm_prime: TrialOutcome,
    pub fm: TrialOutcome,
    pub fm_pair_violations: u64,
}

impl ChainOutcome {
    pub fn ordered(&self) -> bool {
        self.fm_pair_violations == 0
            && self.rfm.root_visits <= self.fm_prime.root_visits
            && self.fm_prime.root_visits <= self.fm.root_visits
    }
}

pub fn dominance_chain(config: &SimConfig, trial_seed: u64) -> Result<ChainOutcome> {
    let pair = crate::fm::run_fm_pair(config, trial_seed)?;
    let rfm = run_rfm_loop_erased(config, trial_seed)?;
    Ok(ChainOutcome {
        rfm,
        fm_prime: pair.fm_prime,
        fm: pair.fm,
        fm_pair_violations: pair.violations,
    })
}
