//! FM(d,p) and its silent-loop variant FM′(d,p).
//!
//! Each frog owns a walk: the `i`-th step of the frog born at `v` is read
//! from the keyed stream `(trial seed, hash(v), FmWalk)` at index `i`. The
//! walk of a frog therefore does not depend on when it was woken, and the
//! set of frogs a run wakes (and the number of root arrivals) does not
//! depend on the scheduler once the run is allowed to finish.
//!
//! FM′ suppresses wake-ups inside completed loops that begin with a step
//! away from the root. Every down-step from `x` opens a frame based at `x`;
//! sleepers reached while a frame is open are queued in it. Returning to the
//! base discards the frame's queue. Queues still open when the frog is
//! removed (or when the run stops) are committed.

use std::collections::{BTreeMap, HashMap};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{fm_step_from_word, ModelParams, Step};
use crate::rng::{substream, KeyedStream, StreamKind, ROOT_HASH};
use crate::schedule::AwakeSet;
use crate::sim::{KillHistogram, KillReason, SimConfig, TrialOutcome};
use crate::tree::{LazyTree, NodeId, ROOT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FmVariant {
    Plain,
    SilentLoops,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct FmSite {
    pub sleeper: bool,
    pub visits: u64,
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    base: NodeId,
    pending_start: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct FmFrog {
    pub pos: NodeId,
    walk: KeyedStream,
    pub birth_hash: u64,
    pub steps: u64,
    pub alive: bool,
    frames: Vec<Frame>,
    pending: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FmArrival {
    /// Landed on `node`, possibly waking the frog with the given id.
    Site { node: NodeId, woke: Option<usize> },
    /// Stepped past the depth cap.
    Removed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct FmEvent {
    pub frog: usize,
    pub from: NodeId,
    pub step: Step,
    pub arrival: FmArrival,
}

pub(crate) struct FmEngine {
    params: ModelParams,
    depth_cap: u32,
    sleeper_limit: u32,
    step_cap: u64,
    record_sites: bool,
    variant: FmVariant,
    trial_seed: u64,
    pub tree: LazyTree<FmSite>,
    pub frogs: Vec<FmFrog>,
    pub awake: AwakeSet,
    rng: ChaCha8Rng,
    pub root_visits: u64,
    pub woken: u64,
    pub steps: u64,
    pub kills: KillHistogram,
    wake_log: Option<Vec<usize>>,
}

impl FmEngine {
    pub fn new(config: &SimConfig, trial_seed: u64, variant: FmVariant) -> Result<Self> {
        config.validate()?;
        let mut engine = Self {
            params: config.params,
            depth_cap: config.depth_cap,
            sleeper_limit: config.sleeper_limit(),
            step_cap: config.step_cap,
            record_sites: config.record_sites,
            variant,
            trial_seed,
            tree: LazyTree::new(config.params.d(), FmSite::default()),
            frogs: Vec::new(),
            awake: AwakeSet::new(config.policy),
            rng: substream(trial_seed, StreamKind::Scheduler),
            root_visits: 0,
            woken: 0,
            steps: 0,
            kills: KillHistogram::default(),
            wake_log: None,
        };
        engine.spawn(ROOT, ROOT_HASH);
        Ok(engine)
    }

    pub fn log_wakes(&mut self) {
        self.wake_log = Some(Vec::new());
    }

    pub fn drain_wake_log(&mut self) -> Vec<usize> {
        self.wake_log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn spawn(&mut self, node: NodeId, birth_hash: u64) -> usize {
        let id = self.frogs.len();
        self.frogs.push(FmFrog {
            pos: node,
            walk: KeyedStream::new(self.trial_seed, birth_hash, StreamKind::FmWalk),
            birth_hash,
            steps: 0,
            alive: true,
            frames: Vec::new(),
            pending: Vec::new(),
        });
        self.awake.push(id);
        id
    }

    fn wake(&mut self, node: NodeId) -> usize {
        self.tree.site_mut(node).sleeper = false;
        self.woken += 1;
        let id = self.spawn(node, self.tree.path_hash(node));
        if let Some(log) = self.wake_log.as_mut() {
            log.push(id);
        }
        id
    }

    fn commit_pending(&mut self, f: usize) {
        let frog = &mut self.frogs[f];
        frog.frames.clear();
        let pending = std::mem::take(&mut frog.pending);
        for node in pending {
            if self.tree.site(node).sleeper {
                self.wake(node);
            }
        }
    }

    fn remove(&mut self, f: usize) {
        self.frogs[f].alive = false;
        self.kills.record(KillReason::DepthCap);
        if self.variant == FmVariant::SilentLoops {
            self.commit_pending(f);
        }
    }

    /// Moves frog `f` one step along its walk.
    pub fn step_frog(&mut self, f: usize) -> FmEvent {
        let (from, word) = {
            let frog = &mut self.frogs[f];
            debug_assert!(frog.alive);
            let word = frog.walk.word(frog.steps);
            frog.steps += 1;
            (frog.pos, word)
        };
        self.steps += 1;
        let step = fm_step_from_word(from == ROOT, &self.params, word);
        let to = match step {
            Step::Parent => self.tree.parent(from).expect("root never steps up"),
            Step::Child(k) => {
                if self.tree.depth(from) >= self.depth_cap {
                    self.remove(f);
                    return FmEvent {
                        frog: f,
                        from,
                        step,
                        arrival: FmArrival::Removed,
                    };
                }
                let limit = self.sleeper_limit;
                self.tree.child_or_insert_with(from, k, |depth| FmSite {
                    sleeper: depth <= limit,
                    visits: 0,
                })
            }
        };
        self.frogs[f].pos = to;
        self.tree.site_mut(to).visits += 1;
        if to == ROOT {
            self.root_visits += 1;
        }
        let sleeper = self.tree.site(to).sleeper;
        let woke = match self.variant {
            FmVariant::Plain => sleeper.then(|| self.wake(to)),
            FmVariant::SilentLoops => self.silent_arrival(f, from, to, step),
        };
        FmEvent {
            frog: f,
            from,
            step,
            arrival: FmArrival::Site { node: to, woke },
        }
    }

    /// Frame bookkeeping for an FM′ arrival at `to`; wakes the sleeper
    /// there only if no frame is open.
    fn silent_arrival(&mut self, f: usize, from: NodeId, to: NodeId, step: Step) -> Option<usize> {
        let sleeper = self.tree.site(to).sleeper;
        let frog = &mut self.frogs[f];
        match step {
            Step::Parent => {
                if let Some(frame) = frog.frames.pop_if(|fr| fr.base == to) {
                    frog.pending.truncate(frame.pending_start);
                }
            }
            Step::Child(_) => frog.frames.push(Frame {
                base: from,
                pending_start: frog.pending.len(),
            }),
        }
        if !sleeper {
            None
        } else if frog.frames.is_empty() {
            Some(self.wake(to))
        } else {
            frog.pending.push(to);
            None
        }
    }

    /// Schedules and moves one frog; `None` once nobody is awake.
    pub fn tick(&mut self) -> Option<FmEvent> {
        let f = self.awake.take(&mut self.rng)?;
        let event = self.step_frog(f);
        if self.frogs[f].alive {
            self.awake.push(f);
        }
        Some(event)
    }

    pub fn prune_awake(&mut self) {
        let frogs = &self.frogs;
        self.awake.retain(|&f| frogs[f].alive);
    }

    pub fn run_to_end(&mut self) {
        while self.steps < self.step_cap && self.tick().is_some() {}
    }

    pub fn step_cap_reached(&self) -> bool {
        self.steps >= self.step_cap
    }

    pub fn finish(mut self) -> TrialOutcome {
        let capped = !self.awake.is_empty();
        if self.variant == FmVariant::SilentLoops {
            for f in 0..self.frogs.len() {
                if self.frogs[f].alive && !self.frogs[f].pending.is_empty() {
                    self.commit_pending(f);
                }
            }
        }
        let per_site_visits = self.record_sites.then(|| {
            self.tree
                .sites()
                .filter(|(_, s)| s.visits > 0)
                .map(|(id, s)| (self.tree.vertex(id), s.visits))
                .collect::<BTreeMap<_, _>>()
        });
        TrialOutcome {
            root_visits: self.root_visits,
            frogs_woken: self.woken,
            steps_used: self.steps,
            truncation: TrialOutcome::classify(capped, &self.kills),
            kills: self.kills,
            per_site_visits,
        }
    }
}

fn run_variant(config: &SimConfig, trial_seed: u64, variant: FmVariant) -> Result<TrialOutcome> {
    let mut engine = FmEngine::new(config, trial_seed, variant)?;
    engine.run_to_end();
    Ok(engine.finish())
}

/// One trial of FM(d,p).
pub fn run_fm(config: &SimConfig, trial_seed: u64) -> Result<TrialOutcome> {
    run_variant(config, trial_seed, FmVariant::Plain)
}

/// One trial of FM′(d,p), with the same frog walks as [`run_fm`].
pub fn run_fm_prime(config: &SimConfig, trial_seed: u64) -> Result<TrialOutcome> {
    run_variant(config, trial_seed, FmVariant::SilentLoops)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmPairOutcome {
    pub fm: TrialOutcome,
    pub fm_prime: TrialOutcome,
    /// Ticks at which FM′ was found outside FM (expected 0).
    pub violations: u64,
    pub first_violation: Option<String>,
}

/// Runs FM and FM′ in lock-step on shared frog walks.
///
/// Each tick the FM scheduler picks a frog; its FM′ twin (same birth site)
/// takes its next step too if it is awake. Once FM stops, FM′ finishes on
/// its own. Checked on every tick: each FM′ wake-up hits a site FM has
/// already woken, no FM′ frog is ahead of its twin, and FM′ has no more
/// root arrivals than FM.
pub fn run_fm_pair(config: &SimConfig, trial_seed: u64) -> Result<FmPairOutcome> {
    let mut fm = FmEngine::new(config, trial_seed, FmVariant::Plain)?;
    let mut fmp = FmEngine::new(config, trial_seed, FmVariant::SilentLoops)?;
    fmp.log_wakes();
    let mut twin: HashMap<u64, usize> = HashMap::from([(ROOT_HASH, 0)]);
    let mut violations = 0u64;
    let mut first_violation = None;
    let mut flag = |tick: u64, msg: String, first: &mut Option<String>| {
        violations += 1;
        first.get_or_insert_with(|| format!("tick {tick}: {msg}"));
    };

    while !fm.step_cap_reached() {
        let Some(event) = fm.tick() else { break };
        let tick = fm.steps;
        let hash = fm.frogs[event.frog].birth_hash;
        if let Some(&g) = twin.get(&hash) {
            if fmp.frogs[g].alive {
                if fmp.frogs[g].steps >= fm.frogs[event.frog].steps {
                    flag(tick, format!("FM′ frog {g} ahead of its FM twin"), &mut first_violation);
                }
                fmp.step_frog(g);
            }
        }
        for g in fmp.drain_wake_log() {
            let node = fmp.frogs[g].pos;
            twin.insert(fmp.frogs[g].birth_hash, g);
            let v = fmp.tree.vertex(node);
            let woken_in_fm = fm.tree.find(&v).is_some_and(|n| !fm.tree.site(n).sleeper);
            if !woken_in_fm {
                flag(tick, format!("FM′ woke {v} before FM did"), &mut first_violation);
            }
        }
        if fmp.root_visits > fm.root_visits {
            flag(
                tick,
                format!("root visits FM′ {} > FM {}", fmp.root_visits, fm.root_visits),
                &mut first_violation,
            );
        }
    }
    fmp.prune_awake();
    fmp.run_to_end();
    let fm = fm.finish();
    let fm_prime = fmp.finish();
    if fm.truncation != crate::sim::Truncation::StepCap && fm_prime.root_visits > fm.root_visits {
        flag(
            fm.steps_used,
            format!("final root visits FM′ {} > FM {}", fm_prime.root_visits, fm.root_visits),
            &mut first_violation,
        );
    }
    Ok(FmPairOutcome {
        fm,
        fm_prime,
        violations,
        first_violation,
    })
}
