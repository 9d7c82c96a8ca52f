use std::collections::BTreeSet;

use frogtree_core::bounds::pa_lower_bound;
use frogtree_core::rng::trial_seed;
use frogtree_core::runner::run_trials;
use frogtree_core::stats::{ks_critical, ks_statistic, proportion_se};
use frogtree_core::{
    dominance_chain, run_fm, run_rfm, sample_vt, visits_profile, vt_config, EarlyRemovalPolicy, ModelParams,
    SchedulePolicy, SimConfig, Summary, Truncation, Vertex,
};
use proptest::prelude::*;

fn params(d: u32, p: f64) -> ModelParams {
    ModelParams::new(d, p).unwrap()
}

fn vt_values(t: u32, params: ModelParams, trials: u64, master: u64) -> Vec<u64> {
    run_trials(trials, master, |_, s| sample_vt(t, params, 10_000_000, s).unwrap().v)
}

#[test]
fn vt_is_nondecreasing_in_t() {
    let p = params(2, 0.42);
    let summaries: Vec<Summary> = (0..=7)
        .map(|t| Summary::from_counts(&vt_values(t, p, 20_000, 300 + u64::from(t))))
        .collect();
    for w in summaries.windows(2) {
        assert!(w[1].mean >= w[0].mean - 3.0 * w[1].pooled_se(&w[0]), "{w:?}");
    }
}

#[test]
fn sibling_entry_beats_the_product_bound() {
    let p = ModelParams::from_rho(2, 0.7).unwrap();
    let trials = 20_000;
    for t in 1..=10u32 {
        let hits = run_trials(trials, 500 + u64::from(t), |_, s| {
            sample_vt(t, p, 10_000_000, s).unwrap().a_event
        })
        .into_iter()
        .filter(|&a| a)
        .count();
        let freq = hits as f64 / trials as f64;
        // sleepers reach level t+1, so the bound of index t+1 applies; it
        // is at least the one of index t
        let bound = pa_lower_bound(t + 1, 0.7).unwrap();
        assert!(bound >= pa_lower_bound(t, 0.7).unwrap());
        assert!(
            freq >= bound - 3.0 * proportion_se(freq, trials),
            "t={t}: {freq} < {bound}"
        );
    }
}

#[test]
fn scheduler_does_not_change_the_law() {
    let c = vt_config(4, params(2, 0.4), 10_000_000);
    let fifo = c.with_policy(SchedulePolicy::Fifo);
    let n = 20_000;
    let a = run_trials(n, 41, |_, s| {
        run_rfm(&c, &EarlyRemovalPolicy::None, s).unwrap().root_visits
    });
    let b = run_trials(n, 42, |_, s| {
        run_rfm(&fifo, &EarlyRemovalPolicy::None, s).unwrap().root_visits
    });
    let d = ks_statistic(&a, &b);
    assert!(d < ks_critical(a.len(), b.len(), 0.001), "KS {d}");
}

#[test]
fn early_removal_never_adds_visits_pathwise() {
    let c = SimConfig::new(params(2, 0.4), 8, 10_000_000).recording_sites();
    let policies = [
        EarlyRemovalPolicy::SubtreeList(vec![Vertex::from_path(vec![1])]),
        EarlyRemovalPolicy::SiteList(BTreeSet::from([
            Vertex::from_path(vec![2]),
            Vertex::from_path(vec![1, 1, 2]),
        ])),
        EarlyRemovalPolicy::RandomBernoulli(0.3),
    ];
    for i in 0..300 {
        let seed = trial_seed(61, i);
        let base = run_rfm(&c, &EarlyRemovalPolicy::None, seed).unwrap();
        let base_sites = base.per_site_visits.unwrap();
        for policy in &policies {
            let cut = run_rfm(&c, policy, seed).unwrap();
            assert!(cut.root_visits <= base.root_visits);
            for (v, n) in cut.per_site_visits.unwrap() {
                assert!(n <= base_sites.get(&v).copied().unwrap_or(0), "{policy:?} at {v}");
            }
        }
    }
}

#[test]
fn visit_profiles() {
    let c = SimConfig::new(params(2, 0.4), 6, 10_000_000);
    let none = visits_profile(&c, &EarlyRemovalPolicy::None, 500, 7).unwrap();
    assert_eq!(none, visits_profile(&c, &EarlyRemovalPolicy::None, 500, 7).unwrap());
    let cut = visits_profile(
        &c,
        &EarlyRemovalPolicy::SubtreeList(vec![Vertex::from_path(vec![1])]),
        500,
        7,
    )
    .unwrap();
    for (v, m) in &cut {
        assert!(*m <= none[v] + 1e-12);
    }
}

#[test]
fn rfm_mean_below_fm_mean() {
    let c = SimConfig::new(params(2, 0.4), 8, 10_000_000);
    let n = 10_000;
    let rfm = run_trials(n, 71, |_, s| {
        run_rfm(&c, &EarlyRemovalPolicy::None, s).unwrap().root_visits
    });
    let fm = run_trials(n, 71, |_, s| run_fm(&c, s).unwrap().root_visits);
    let (a, b) = (Summary::from_counts(&rfm), Summary::from_counts(&fm));
    assert!(a.mean <= b.mean + 3.0 * a.pooled_se(&b), "{} vs {}", a.mean, b.mean);
}

#[test]
fn dominance_chain_is_pathwise() {
    let c = SimConfig::new(params(2, 0.4), 10, 50_000_000);
    for i in 0..300 {
        let chain = dominance_chain(&c, trial_seed(81, i)).unwrap();
        assert!(chain.ordered(), "trial {i}: {chain:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kill_accounting(d in 2u32..=4, p in 0.0f64..0.5, depth in 1u32..=5, seed: u64, q in 0.0f64..=1.0) {
        let c = SimConfig::new(params(d, p), depth, 10_000_000);
        for policy in [EarlyRemovalPolicy::None, EarlyRemovalPolicy::RandomBernoulli(q)] {
            let out = run_rfm(&c, &policy, seed).unwrap();
            prop_assert_eq!(out.truncation == Truncation::StepCap, false);
            prop_assert_eq!(out.kills.hit_root, out.root_visits);
            prop_assert_eq!(out.kills.total(), out.frogs_woken + 1);
            if policy == EarlyRemovalPolicy::None {
                prop_assert_eq!(out.kills.early, 0);
            }
        }
    }

    #[test]
    fn vt_support(t in 0u32..=3, rho in 0.0f64..1.0, seed: u64) {
        let s = sample_vt(t, ModelParams::from_rho(2, rho).unwrap(), 10_000_000, seed).unwrap();
        let sleepers: u64 = (1..=t + 1).map(|k| 2u64.pow(k)).sum();
        prop_assert!(s.v <= sleepers);
        if t == 0 {
            prop_assert!(s.v <= 1);
            prop_assert!(!s.a_event);
        }
    }
}
