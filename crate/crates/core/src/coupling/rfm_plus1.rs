//! RFM(d,p) driving RFM′(d+1,p).
//!
//! The follower mirrors up-steps, answers a waking down-step with a uniform
//! sleeper child of its own vertex (indexed in coordinate order) and is
//! removed whenever the leader frog is. Among removals on hitting a visited
//! site, a follower coin with probability 1/(d+1) marks the removal as an
//! extra kill, which is the part the real RFM(d+1,p) would not have made.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rfm::{DownOutcome, EarlyRemovalPolicy, RfmDriver, RfmEngine, RfmMove};
use crate::rng::{substream, StreamKind};
use crate::sim::{KillHistogram, KillReason, SimConfig, TrialOutcome};
use crate::tree::{LazyTree, NodeId, ROOT};

use super::log::{CheckMode, InvariantLog};

/// Marginal probability that a frog of RFM′(d+1,p) leaving a vertex with
/// `s_prime` sleeping children is removed beyond the RFM(d+1,p) rules.
pub fn effective_extra_kill(d: u32, s_prime: u32) -> Result<f64> {
    if d < 1 {
        return Err(Error::Domain {
            name: "d",
            value: f64::from(d),
            expected: "at least 1",
        });
    }
    if !(1..=d + 1).contains(&s_prime) {
        return Err(Error::Domain {
            name: "S′",
            value: f64::from(s_prime),
            expected: "1..=d+1",
        });
    }
    Ok(f64::from(d + 1 - s_prime) / f64::from(d * (d + 1)))
}

/// Down-steps and extra kills of the follower, indexed by S′ of the vertex
/// left (index 0 unused). Steps from the last sleeper level are excluded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtraKillStats {
    pub down_steps: Vec<u64>,
    pub extra_kills: Vec<u64>,
}

impl ExtraKillStats {
    fn new(d: u32) -> Self {
        let n = d as usize + 2;
        Self {
            down_steps: vec![0; n],
            extra_kills: vec![0; n],
        }
    }

    pub fn merge(&mut self, other: &Self) {
        if self.down_steps.len() < other.down_steps.len() {
            self.down_steps.resize(other.down_steps.len(), 0);
            self.extra_kills.resize(other.extra_kills.len(), 0);
        }
        for (i, (&n, &x)) in other.down_steps.iter().zip(&other.extra_kills).enumerate() {
            self.down_steps[i] += n;
            self.extra_kills[i] += x;
        }
    }

    pub fn frequency(&self, s_prime: usize) -> Option<f64> {
        let n = *self.down_steps.get(s_prime)?;
        (n > 0).then(|| self.extra_kills[s_prime] as f64 / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledRfmOutcome {
    pub small: TrialOutcome,
    pub large: TrialOutcome,
    pub log: InvariantLog,
    pub extra: ExtraKillStats,
    pub aborted: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct LargeSite {
    sleeper: bool,
    sleeping_children: u32,
    /// Paired small vertex.
    partner: Option<NodeId>,
}

struct Follower {
    d1: u32,
    limit: u32,
    tree: LazyTree<LargeSite>,
    /// Large vertex paired with each small vertex.
    pairing: Vec<Option<NodeId>>,
    pos: Vec<Option<NodeId>>,
    alive: usize,
    rng: ChaCha8Rng,
    root_visits: u64,
    woken: u64,
    kills: KillHistogram,
}

impl Follower {
    fn pair(&mut self, small: NodeId, large: NodeId) {
        let i = small as usize;
        if self.pairing.len() <= i {
            self.pairing.resize(i + 1, None);
        }
        self.pairing[i] = Some(large);
        self.tree.site_mut(large).partner = Some(small);
    }

    fn partner_of(&self, small: NodeId) -> Option<NodeId> {
        self.pairing.get(small as usize).copied().flatten()
    }

    fn remove(&mut self, f: usize, reason: KillReason) {
        self.pos[f] = None;
        self.alive -= 1;
        self.kills.record(reason);
    }

    /// Uniform sleeper child of `v`, in coordinate order.
    fn sleeper_child(&mut self, v: NodeId) -> Option<u8> {
        let depth = self.tree.depth(v);
        if depth >= self.limit {
            return None;
        }
        let asleep: Vec<u8> = (1..=self.d1 as u8)
            .filter(|&j| self.tree.get_child(v, j).is_none_or(|c| self.tree.site(c).sleeper))
            .collect();
        if asleep.is_empty() {
            return None;
        }
        Some(asleep[self.rng.random_range(0..asleep.len())])
    }
}

/// One coupled trial; `config` describes the small model RFM(d,p).
pub fn run_coupled_rfm(config: &SimConfig, mode: CheckMode, trial_seed: u64) -> Result<CoupledRfmOutcome> {
    let d = config.params.d();
    ModelParams::new(d + 1, config.params.p())?;
    let mut leader = RfmEngine::new(config, &EarlyRemovalPolicy::None, RfmDriver::Stacks, trial_seed)?;
    let limit = leader.region_depth();
    let mut follower = Follower {
        d1: d + 1,
        limit,
        tree: LazyTree::new(
            d + 1,
            LargeSite {
                sleeper: false,
                sleeping_children: if limit >= 1 { d + 1 } else { 0 },
                partner: None,
            },
        ),
        pairing: Vec::new(),
        pos: vec![Some(ROOT)],
        alive: 1,
        rng: substream(trial_seed, StreamKind::Follower),
        root_visits: 0,
        woken: 0,
        kills: KillHistogram::default(),
    };
    follower.pair(ROOT, ROOT);
    let mut log = InvariantLog::default();
    let mut extra = ExtraKillStats::new(d);
    let mut leader_alive = 1usize;
    let mut aborted = false;
    if mode != CheckMode::Off {
        log.check_eq(
            "initial sleeping children",
            (None, None),
            (d, d + 1),
            (
                leader.tree.site(ROOT).sleeping_children,
                follower.tree.site(ROOT).sleeping_children,
            ),
        );
    }

    while !leader.step_cap_reached() {
        let Some(event) = leader.tick() else { break };
        log.ticks += 1;
        let f = event.frog;
        let Some(from_large) = follower.pos[f] else {
            log.check(
                "bijection",
                false,
                (Some(f), Some(f)),
                || "live partner".into(),
                || "removed".into(),
            );
            aborted = true;
            break;
        };
        let mut ok = true;
        // vertices whose sleeper counts or pairing this tick touched
        let mut touched: Vec<NodeId> = Vec::with_capacity(2);
        match event.mv {
            RfmMove::Up { hit_root, .. } => {
                let to = follower
                    .tree
                    .parent(from_large)
                    .expect("leader never climbs from the root");
                follower.pos[f] = Some(to);
                if hit_root {
                    follower.root_visits += 1;
                    follower.remove(f, KillReason::HitRoot);
                    leader_alive -= 1;
                }
            }
            RfmMove::Down { from, outcome, .. } => {
                let s_prime = follower.tree.site(from_large).sleeping_children;
                let interior = leader.tree.depth(from) < limit;
                if interior {
                    extra.down_steps[s_prime as usize] += 1;
                }
                match outcome {
                    DownOutcome::Woke { node, frog: g, .. } => {
                        touched.push(from);
                        match follower.sleeper_child(from_large) {
                            Some(j) => {
                                let (d1, lim) = (follower.d1, limit);
                                let to = follower.tree.child_or_insert_with(from_large, j, |depth| LargeSite {
                                    sleeper: depth <= lim,
                                    sleeping_children: if depth < lim { d1 } else { 0 },
                                    partner: None,
                                });
                                let site = follower.tree.site_mut(to);
                                site.sleeper = false;
                                follower.tree.site_mut(from_large).sleeping_children -= 1;
                                follower.woken += 1;
                                follower.pair(node, to);
                                follower.pos[f] = Some(to);
                                debug_assert_eq!(follower.pos.len(), g);
                                follower.pos.push(Some(to));
                                follower.alive += 1;
                                leader_alive += 1;
                                touched.push(node);
                            }
                            None => {
                                ok &= log.check(
                                    "wake availability",
                                    false,
                                    (Some(f), Some(f)),
                                    || "a sleeper child".into(),
                                    || "none".into(),
                                );
                            }
                        }
                    }
                    DownOutcome::HitVisited { .. } => {
                        let is_extra = follower.rng.random::<f64>() < 1.0 / f64::from(d + 1);
                        if is_extra {
                            if interior {
                                extra.extra_kills[s_prime as usize] += 1;
                            }
                            follower.remove(f, KillReason::EarlyRemoval);
                        } else {
                            follower.remove(f, KillReason::HitVisited);
                        }
                        leader_alive -= 1;
                    }
                    DownOutcome::Culled => {
                        follower.remove(f, KillReason::DepthCap);
                        leader_alive -= 1;
                    }
                    DownOutcome::ExtraKilled => unreachable!("the leader has no early removals"),
                }
            }
            RfmMove::Exhausted => unreachable!("stack-driven frogs never run out"),
        }
        if mode != CheckMode::Off {
            ok &= check_tick(&leader, &follower, f, &touched, leader_alive, &mut log);
            if mode == CheckMode::Full {
                ok &= check_all(&leader, &follower, &mut log);
            }
        }
        if !ok {
            aborted = true;
            break;
        }
    }
    if !aborted && mode != CheckMode::Off {
        log.check_eq("root visits", (None, None), leader.root_visits, follower.root_visits);
    }

    let steps = leader.steps;
    let small = leader.finish().outcome;
    let large = TrialOutcome {
        root_visits: follower.root_visits,
        frogs_woken: follower.woken,
        steps_used: steps,
        truncation: small.truncation,
        kills: follower.kills,
        per_site_visits: None,
    };
    Ok(CoupledRfmOutcome {
        small,
        large,
        log,
        extra,
        aborted,
    })
}

fn check_frog(leader: &RfmEngine, follower: &Follower, f: usize, log: &mut InvariantLog) -> bool {
    let alive = leader.frogs[f].alive;
    let mut ok = log.check_eq("alive together", (Some(f), Some(f)), alive, follower.pos[f].is_some());
    if let (true, Some(pos)) = (alive, follower.pos[f]) {
        let small = leader.frogs[f].pos;
        ok &= log.check_eq(
            "equal displacement",
            (Some(f), Some(f)),
            leader.tree.depth(small),
            follower.tree.depth(pos),
        );
        ok &= log.check_eq(
            "frogs on paired vertices",
            (Some(f), Some(f)),
            Some(pos),
            follower.partner_of(small),
        );
        // S(f,t) + 1 = S(f′,t), only where sleepers can still sit below
        if leader.tree.depth(small) < follower.limit {
            ok &= log.check_eq(
                "sleep-ineq",
                (Some(f), Some(f)),
                leader.tree.site(small).sleeping_children + 1,
                follower.tree.site(pos).sleeping_children,
            );
        }
    }
    ok
}

fn check_vertex(leader: &RfmEngine, follower: &Follower, v: NodeId, log: &mut InvariantLog) -> bool {
    let Some(v_large) = follower.partner_of(v) else {
        return log.check(
            "vertex pairing",
            false,
            (None, None),
            || "paired".into(),
            || "unpaired".into(),
        );
    };
    let mut ok = log.check_eq(
        "vertex pairing",
        (None, None),
        Some(v),
        follower.tree.site(v_large).partner,
    );
    if leader.tree.depth(v) < follower.limit {
        ok &= log.check_eq(
            "vertex-ineq",
            (None, None),
            leader.tree.site(v).sleeping_children + 1,
            follower.tree.site(v_large).sleeping_children,
        );
    }
    ok
}

fn check_tick(
    leader: &RfmEngine,
    follower: &Follower,
    f: usize,
    touched: &[NodeId],
    leader_alive: usize,
    log: &mut InvariantLog,
) -> bool {
    let mut ok = log.check_eq("bijection", (None, None), leader_alive, follower.alive);
    ok &= check_frog(leader, follower, f, log);
    if touched.len() == 2 {
        // the frog woken this tick
        ok &= check_frog(leader, follower, leader.frogs.len() - 1, log);
    }
    for &v in touched {
        ok &= check_vertex(leader, follower, v, log);
    }
    ok
}

fn check_all(leader: &RfmEngine, follower: &Follower, log: &mut InvariantLog) -> bool {
    let mut ok = true;
    for f in 0..leader.frogs.len() {
        ok &= check_frog(leader, follower, f, log);
    }
    for (v, _) in leader.tree.sites() {
        if leader.tree.site(v).visited {
            ok &= check_vertex(leader, follower, v, log);
        }
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(d: u32, p: f64, depth: u32) -> SimConfig {
        SimConfig::new(ModelParams::new(d, p).unwrap(), depth, 5_000_000)
    }

    #[test]
    fn extra_kill_formula() {
        assert_eq!(effective_extra_kill(2, 3).unwrap(), 0.0);
        assert!((effective_extra_kill(2, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((effective_extra_kill(3, 2).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(effective_extra_kill(2, 0).is_err());
        assert!(effective_extra_kill(2, 4).is_err());
    }

    #[test]
    fn leader_is_plain_rfm() {
        let c = config(2, 0.4, 8);
        for seed in 0..10 {
            let out = run_coupled_rfm(&c, CheckMode::Incremental, seed).unwrap();
            let alone = crate::rfm::run_rfm(&c, &EarlyRemovalPolicy::None, seed).unwrap();
            assert_eq!(out.small, alone);
        }
    }

    #[test]
    fn full_checks_are_clean() {
        for (d, p) in [(2, 0.3), (2, 0.4), (3, 0.4)] {
            for seed in 0..20 {
                let out = run_coupled_rfm(&config(d, p, 6), CheckMode::Full, seed).unwrap();
                assert!(out.log.is_clean(), "{:?}", out.log.first_violation);
                assert_eq!(out.small.root_visits, out.large.root_visits);
            }
        }
    }

    #[test]
    fn no_extra_kills_with_all_children_asleep() {
        let mut total = ExtraKillStats::default();
        for seed in 0..200 {
            let out = run_coupled_rfm(&config(2, 0.4, 6), CheckMode::Off, seed).unwrap();
            total.merge(&out.extra);
        }
        assert_eq!(total.extra_kills[3], 0);
        assert!(total.down_steps[3] > 0);
    }
}
