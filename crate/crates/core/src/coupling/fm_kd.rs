//! FM(d,p) driving a modified FM(kd,p) through the block embedding.
//!
//! The follower mirrors every up-step, answers a down-step to child i with a
//! uniform child in G(i), and wakes a sleeper exactly when the leader does.
//! Each follower frog is the partner of the leader frog with the same id.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fm::{FmArrival, FmEngine, FmEvent, FmVariant};
use crate::model::{ModelParams, Step};
use crate::rng::{substream, StreamKind};
use crate::sim::{KillHistogram, SimConfig, TrialOutcome};
use crate::tree::{LazyTree, NodeId, ROOT};

use super::embedding::Embedding;
use super::log::{CheckMode, InvariantLog};

#[derive(Debug, Clone, Copy, Default)]
struct LargeSite {
    sleeper: bool,
    visited: bool,
    visits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledFmOutcome {
    pub small: TrialOutcome,
    pub large: TrialOutcome,
    pub log: InvariantLog,
    /// True when a violation stopped the run early.
    pub aborted: bool,
}

struct Follower {
    embedding: Embedding,
    tree: LazyTree<LargeSite>,
    /// Position of each frog's partner; `None` once removed.
    pos: Vec<Option<NodeId>>,
    alive: usize,
    rng: ChaCha8Rng,
    root_visits: u64,
    woken: u64,
    kills: KillHistogram,
}

impl Follower {
    /// Whether `large` projects onto `small`, walking both to the root.
    fn projects_onto(&self, small_tree: &LazyTree<impl Sized>, mut small: NodeId, mut large: NodeId) -> bool {
        if self.tree.depth(large) != small_tree.depth(small) {
            return false;
        }
        while small != ROOT {
            let i = small_tree.child_index(small);
            if self.embedding.project_index(self.tree.child_index(large)) != i {
                return false;
            }
            small = small_tree.parent(small).expect("non-root");
            large = self.tree.parent(large).expect("same depth");
        }
        true
    }
}

/// One coupled trial. `config` describes the small model; the follower
/// uses the same caps and sleeper region on the kd-ary tree.
pub fn run_coupled_fm(config: &SimConfig, k: u32, mode: CheckMode, trial_seed: u64) -> Result<CoupledFmOutcome> {
    let embedding = Embedding::new(config.params.d(), k)?;
    // validates the large degree too
    ModelParams::new(embedding.large_degree(), config.params.p())?;
    let mut leader = FmEngine::new(config, trial_seed, FmVariant::Plain)?;
    let limit = config.sleeper_limit();
    let mut follower = Follower {
        embedding,
        tree: LazyTree::new(
            embedding.large_degree(),
            LargeSite {
                sleeper: false,
                visited: true,
                visits: 0,
            },
        ),
        pos: vec![Some(ROOT)],
        alive: 1,
        rng: substream(trial_seed, StreamKind::Follower),
        root_visits: 0,
        woken: 0,
        kills: KillHistogram::default(),
    };
    let mut log = InvariantLog::default();
    let mut leader_alive = 1usize;
    let mut aborted = false;

    while !leader.step_cap_reached() {
        let Some(event) = leader.tick() else { break };
        log.ticks += 1;
        let ok = mirror(&leader, &mut follower, event, limit, mode, &mut log, &mut leader_alive);
        if !ok {
            aborted = true;
            break;
        }
    }
    if !aborted && mode != CheckMode::Off {
        log.check_eq("root visits", (None, None), leader.root_visits, follower.root_visits);
    }

    let record = config.record_sites;
    let large_sites = record.then(|| {
        follower
            .tree
            .sites()
            .filter(|(_, s)| s.visits > 0)
            .map(|(id, s)| (follower.tree.vertex(id), s.visits))
            .collect::<BTreeMap<_, _>>()
    });
    let steps = leader.steps;
    let small = leader.finish();
    let large = TrialOutcome {
        root_visits: follower.root_visits,
        frogs_woken: follower.woken,
        steps_used: steps,
        truncation: small.truncation,
        kills: follower.kills,
        per_site_visits: large_sites,
    };
    Ok(CoupledFmOutcome {
        small,
        large,
        log,
        aborted,
    })
}

/// Applies one leader event to the follower and checks what it touched.
/// Returns false on a violation.
fn mirror(
    leader: &FmEngine,
    follower: &mut Follower,
    event: FmEvent,
    limit: u32,
    mode: CheckMode,
    log: &mut InvariantLog,
    leader_alive: &mut usize,
) -> bool {
    let f = event.frog;
    let checking = mode != CheckMode::Off;
    let Some(from) = follower.pos[f] else {
        return log.check(
            "bijection",
            false,
            (Some(f), Some(f)),
            || "live partner".into(),
            || "removed".into(),
        );
    };
    let mut ok = true;
    match (event.step, event.arrival) {
        (_, FmArrival::Removed) => {
            *leader_alive -= 1;
            follower.pos[f] = None;
            follower.alive -= 1;
            follower.kills.record(crate::sim::KillReason::DepthCap);
        }
        (Step::Parent, FmArrival::Site { woke, .. }) => {
            let to = follower.tree.parent(from).expect("leader never climbs from the root");
            follower.pos[f] = Some(to);
            follower.tree.site_mut(to).visits += 1;
            if to == ROOT {
                follower.root_visits += 1;
            }
            ok &= arrive(follower, to, woke, checking, log, leader_alive);
        }
        (Step::Child(i), FmArrival::Site { node, woke }) => {
            let block = follower.embedding.block(i);
            let j = follower.rng.random_range(block);
            let first_visit = leader.tree.site(node).visits == 1;
            let to = follower.tree.child_or_insert_with(from, j, |depth| LargeSite {
                sleeper: depth <= limit,
                visited: false,
                visits: 0,
            });
            if checking && first_visit {
                let fresh = !follower.tree.site(to).visited;
                ok &= log.check(
                    "first visit maps to an unvisited leaf",
                    fresh,
                    (Some(f), Some(f)),
                    || "unvisited".into(),
                    || "visited".into(),
                );
            }
            follower.pos[f] = Some(to);
            let site = follower.tree.site_mut(to);
            site.visited = true;
            site.visits += 1;
            ok &= arrive(follower, to, woke, checking, log, leader_alive);
        }
    }
    if checking {
        ok &= log.check_eq("bijection", (None, None), *leader_alive, follower.alive);
        ok &= log.check_eq(
            "alive together",
            (Some(f), Some(f)),
            leader.frogs[f].alive,
            follower.pos[f].is_some(),
        );
        if let (true, Some(pos)) = (leader.frogs[f].alive, follower.pos[f]) {
            ok &= check_pair(leader, follower, f, pos, log);
        }
        if mode == CheckMode::Full {
            for g in 0..leader.frogs.len() {
                match (leader.frogs[g].alive, follower.pos[g]) {
                    (true, Some(pos)) => ok &= check_pair(leader, follower, g, pos, log),
                    (a, b) => ok &= log.check_eq("alive together", (Some(g), Some(g)), a, b.is_some()),
                }
            }
        }
    }
    ok
}

fn check_pair(leader: &FmEngine, follower: &Follower, f: usize, pos: NodeId, log: &mut InvariantLog) -> bool {
    let small = leader.frogs[f].pos;
    let mut ok = log.check_eq(
        "equal displacement",
        (Some(f), Some(f)),
        leader.tree.depth(small),
        follower.tree.depth(pos),
    );
    let projects = follower.projects_onto(&leader.tree, small, pos);
    ok &= log.check(
        "projection",
        projects,
        (Some(f), Some(f)),
        || leader.tree.vertex(small).to_string(),
        || follower.embedding.project(&follower.tree.vertex(pos)).to_string(),
    );
    ok
}

fn arrive(
    follower: &mut Follower,
    large_node: NodeId,
    woke: Option<usize>,
    checking: bool,
    log: &mut InvariantLog,
    leader_alive: &mut usize,
) -> bool {
    let Some(g) = woke else { return true };
    *leader_alive += 1;
    let available = follower.tree.site(large_node).sleeper;
    let ok = !checking
        || log.check(
            "wake availability",
            available,
            (Some(g), Some(g)),
            || "sleeper under the partner".into(),
            || "empty site".into(),
        );
    follower.tree.site_mut(large_node).sleeper = false;
    follower.woken += 1;
    debug_assert_eq!(follower.pos.len(), g);
    follower.pos.push(Some(large_node));
    follower.alive += 1;
    ok
}
