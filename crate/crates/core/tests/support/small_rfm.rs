//! Exact enumeration of RFM(2,p) with sleepers on the first two levels,
//! written independently of the simulator.

use std::collections::BTreeMap;

/// Vertices of the depth-2 binary tree: 0 root, 1..=2 depth one,
/// 3..=6 depth two (children of v are 2v+1, 2v+2).
fn parent(v: usize) -> usize {
    (v - 1) / 2
}

fn depth(v: usize) -> u32 {
    match v {
        0 => 0,
        1 | 2 => 1,
        _ => 2,
    }
}

#[derive(Clone, Copy)]
enum Stage {
    Up,
    Down,
}

/// Exact law of the root-visit count with sleepers at depths 1..=levels
/// (levels 1 or 2). Frogs are resolved one at a time, depth first; the law
/// does not depend on the order.
pub fn exact_law(rho: f64, levels: u32) -> BTreeMap<u32, f64> {
    let mut law = BTreeMap::new();
    let visited = 1u8; // root
    explore(rho, levels, visited, vec![(0, Stage::Down)], 0, 1.0, &mut law);
    law
}

fn explore(
    rho: f64,
    levels: u32,
    visited: u8,
    mut frogs: Vec<(usize, Stage)>,
    visits: u32,
    prob: f64,
    law: &mut BTreeMap<u32, f64>,
) {
    let Some((v, stage)) = frogs.pop() else {
        *law.entry(visits).or_default() += prob;
        return;
    };
    match stage {
        Stage::Up => {
            // climb
            let up = parent(v);
            if up == 0 {
                explore(rho, levels, visited, frogs.clone(), visits + 1, prob * rho, law);
            } else {
                let mut f = frogs.clone();
                f.push((up, Stage::Up));
                explore(rho, levels, visited, f, visits, prob * rho, law);
            }
            // first step away from the root, to either child
            for c in [2 * v + 1, 2 * v + 2] {
                step_down(
                    rho,
                    levels,
                    visited,
                    frogs.clone(),
                    v,
                    c,
                    visits,
                    prob * (1.0 - rho) / 2.0,
                    law,
                );
            }
        }
        Stage::Down => {
            for c in [2 * v + 1, 2 * v + 2] {
                step_down(rho, levels, visited, frogs.clone(), v, c, visits, prob / 2.0, law);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn step_down(
    rho: f64,
    levels: u32,
    visited: u8,
    mut frogs: Vec<(usize, Stage)>,
    from: usize,
    to: usize,
    visits: u32,
    prob: f64,
    law: &mut BTreeMap<u32, f64>,
) {
    if depth(from) >= levels {
        // below the sleepers: never returns, wakes nobody
        explore(rho, levels, visited, frogs, visits, prob, law);
        return;
    }
    if visited & (1 << to) != 0 {
        explore(rho, levels, visited, frogs, visits, prob, law);
        return;
    }
    frogs.push((to, Stage::Up));
    frogs.push((to, Stage::Down));
    explore(rho, levels, visited | (1 << to), frogs, visits, prob, law);
}
