use std::collections::BTreeSet;

use frogtree_core::rng::trial_seed;
use frogtree_core::runner::run_trials;
use frogtree_core::{
    check_dominance, effective_extra_kill, run_coupled_fm, run_coupled_rfm, run_fm, CheckMode, Embedding,
    ExtraKillStats, ModelParams, SimConfig, Vertex,
};
use proptest::prelude::*;

fn config(d: u32, p: f64, depth: u32) -> SimConfig {
    SimConfig::new(ModelParams::new(d, p).unwrap(), depth, 50_000_000)
}

fn all_vertices(d: u8, max_depth: usize) -> Vec<Vertex> {
    let mut out = vec![Vertex::root()];
    let mut level = vec![Vertex::root()];
    for _ in 0..max_depth {
        level = level.iter().flat_map(|v| (1..=d).map(move |k| v.child(k))).collect();
        out.extend(level.iter().cloned());
    }
    out
}

/// T_k(L_v) straight from the definition: large vertices whose coordinate
/// projection lies on the path from the root to v.
fn path_tree_oracle(v: &Vertex, k: u8) -> BTreeSet<Vertex> {
    let on_path: BTreeSet<Vertex> = (0..=v.depth())
        .map(|n| Vertex::from_path(v.path()[..n].to_vec()))
        .collect();
    all_vertices(2 * k, v.depth())
        .into_iter()
        .filter(|u| {
            let proj: Vec<u8> = u.path().iter().map(|&j| (j - 1) / k + 1).collect();
            on_path.contains(&Vertex::from_path(proj))
        })
        .collect()
}

#[test]
fn blocks_partition_the_large_children() {
    for d in 1..=8u32 {
        for k in 1..=8u32 {
            let e = Embedding::new(d, k).unwrap();
            let mut seen = vec![0u32; (d * k) as usize + 1];
            for i in 1..=d as u8 {
                for j in e.block(i) {
                    seen[j as usize] += 1;
                    assert_eq!(e.project_index(j), i);
                }
            }
            assert_eq!(seen[0], 0);
            assert!(seen[1..].iter().all(|&n| n == 1), "d={d} k={k}");
        }
    }
}

#[test]
fn intersection_law() {
    let vertices = all_vertices(2, 5);
    for k in [2u32, 3] {
        let e = Embedding::new(2, k).unwrap();
        let trees: Vec<BTreeSet<Vertex>> = vertices.iter().map(|v| e.path_tree(v)).collect();
        for (v, tv) in vertices.iter().zip(&trees) {
            if v.depth() <= 3 {
                assert_eq!(tv, &path_tree_oracle(v, k as u8));
            }
        }
        for (i, v) in vertices.iter().enumerate() {
            for (j, w) in vertices.iter().enumerate() {
                let lhs: BTreeSet<&Vertex> = trees[i].intersection(&trees[j]).collect();
                let meet_tree = e.path_tree(&v.meet(w));
                let rhs: BTreeSet<&Vertex> = meet_tree.iter().collect();
                assert_eq!(lhs, rhs, "k={k} v={v} w={w}");
            }
        }
    }
}

#[test]
fn fm_block_coupling_is_clean() {
    for (i, p) in [0.2, 0.3, 0.4].into_iter().enumerate() {
        let c = config(2, p, 8);
        for n in 0..150 {
            let out = run_coupled_fm(&c, 2, CheckMode::Incremental, trial_seed(i as u64, n)).unwrap();
            assert!(out.log.is_clean(), "p={p}: {}", out.log.first_violation.unwrap());
            assert!(out.log.checks["equal displacement"] > 0);
        }
    }
}

#[test]
fn rfm_plus_one_coupling_is_clean() {
    for (d, p) in [(2, 0.3), (2, 0.4), (3, 0.3), (3, 0.4)] {
        let c = config(d, p, 9);
        for n in 0..100 {
            let out = run_coupled_rfm(&c, CheckMode::Incremental, trial_seed(u64::from(d) * 10, n)).unwrap();
            assert!(out.log.is_clean(), "d={d} p={p}: {}", out.log.first_violation.unwrap());
            assert_eq!(out.small.root_visits, out.large.root_visits);
        }
    }
}

#[test]
fn extra_kill_law() {
    let c = config(2, 0.4, 12);
    let mut stats = ExtraKillStats::default();
    let mut trials = 0;
    while stats.down_steps.iter().sum::<u64>() < 100_000 {
        let out = run_coupled_rfm(&c, CheckMode::Off, trial_seed(99, trials)).unwrap();
        stats.merge(&out.extra);
        trials += 1;
    }
    for s in 1..=3usize {
        let n = stats.down_steps[s];
        assert!(n > 1000, "few steps with S'={s}");
        let q = effective_extra_kill(2, s as u32).unwrap();
        let freq = stats.frequency(s).unwrap();
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((freq - q).abs() <= 3.0 * se, "S'={s}: {freq} vs {q}");
    }
}

#[test]
fn fm_is_dominated_by_the_wider_tree() {
    let small = run_trials(10_000, 3, |_, s| run_fm(&config(2, 0.3, 6), s).unwrap().root_visits);
    let large = run_trials(10_000, 4, |_, s| run_fm(&config(4, 0.3, 6), s).unwrap().root_visits);
    let report = check_dominance(&small, &large, 3.0);
    assert!(report.pass, "{report:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coupled_runs_are_clean(d in 2u32..=3, k in 1u32..=3, p in 0.0f64..0.5, depth in 1u32..=5, seed: u64) {
        let c = config(d, p, depth);
        let fm = run_coupled_fm(&c, k, CheckMode::Full, seed).unwrap();
        prop_assert!(fm.log.is_clean(), "{:?}", fm.log.first_violation);
        prop_assert_eq!(fm.small.frogs_woken, fm.large.frogs_woken);
        let rfm = run_coupled_rfm(&c, CheckMode::Full, seed).unwrap();
        prop_assert!(rfm.log.is_clean(), "{:?}", rfm.log.first_violation);
    }

    #[test]
    fn projection_of_leaves(d in 1u32..=4, k in 1u32..=4, path in prop::collection::vec(1u8..=4, 0..4)) {
        let e = Embedding::new(d, k).unwrap();
        let v = Vertex::from_path(path.into_iter().map(|i| (i - 1) % d as u8 + 1).collect::<Vec<_>>());
        let leaves = e.leaves(&v);
        prop_assert_eq!(leaves.len() as u64, u64::from(k).pow(v.depth() as u32));
        for u in leaves {
            prop_assert_eq!(e.project(&u), v.clone());
        }
    }
}
