//! Block embedding of the d-ary tree into the kd-ary tree.
//!
//! Child index i of the small tree corresponds to the block
//! G(i) = {k(i-1)+1, ..., ki} of the large tree, so a large vertex projects
//! coordinate-wise onto the small vertex `ceil(x/k)`.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Vertex, MAX_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    d: u32,
    k: u32,
}

impl Embedding {
    pub fn new(d: u32, k: u32) -> Result<Self> {
        if d < 1 {
            return Err(Error::Domain {
                name: "d",
                value: f64::from(d),
                expected: "at least 1",
            });
        }
        if k < 1 {
            return Err(Error::Domain {
                name: "k",
                value: f64::from(k),
                expected: "at least 1",
            });
        }
        if u64::from(d) * u64::from(k) > u64::from(MAX_DEGREE) {
            return Err(Error::Config(format!("k*d = {} exceeds {MAX_DEGREE}", d * k)));
        }
        Ok(Self { d, k })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Degree of the large tree.
    pub fn large_degree(&self) -> u32 {
        self.d * self.k
    }

    /// G(i) for `1 <= i <= d`.
    pub fn block(&self, i: u8) -> RangeInclusive<u8> {
        debug_assert!(i >= 1 && u32::from(i) <= self.d);
        let k = self.k as u8;
        (k * (i - 1) + 1)..=(k * i)
    }

    /// The small child index whose block contains the large index `j`.
    pub fn project_index(&self, j: u8) -> u8 {
        (u32::from(j).div_ceil(self.k)) as u8
    }

    pub fn project(&self, v: &Vertex) -> Vertex {
        Vertex::from_path(v.path().iter().map(|&j| self.project_index(j)).collect::<Vec<_>>())
    }

    /// Large vertices at the depth of `v` that project onto `v`.
    pub fn leaves(&self, v: &Vertex) -> Vec<Vertex> {
        let mut out = vec![Vertex::root()];
        for &i in v.path() {
            out = out
                .iter()
                .flat_map(|u| self.block(i).map(move |j| u.child(j)))
                .collect();
        }
        out
    }

    /// T_k(L_v): every large vertex projecting onto the path from the root
    /// to `v`.
    pub fn path_tree(&self, v: &Vertex) -> BTreeSet<Vertex> {
        let mut set = BTreeSet::new();
        let mut prefix = Vertex::root();
        set.insert(prefix.clone());
        for &i in v.path() {
            prefix.push(i);
            set.extend(self.leaves(&prefix));
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_for_d2_k2() {
        let e = Embedding::new(2, 2).unwrap();
        assert_eq!(e.block(1), 1..=2);
        assert_eq!(e.block(2), 3..=4);
        assert_eq!(e.project_index(3), 2);
    }

    #[test]
    fn identity_embedding() {
        let e = Embedding::new(3, 1).unwrap();
        let v = Vertex::from_path(vec![3, 1, 2]);
        assert_eq!(e.project(&v), v);
        assert_eq!(e.leaves(&v), vec![v.clone()]);
        assert_eq!(e.path_tree(&v).len(), 4);
    }

    #[test]
    fn path_tree_sizes() {
        let e = Embedding::new(2, 3).unwrap();
        let v = Vertex::from_path(vec![2, 1, 2]);
        assert_eq!(e.leaves(&v).len(), 27);
        assert_eq!(e.path_tree(&v).len(), 1 + 3 + 9 + 27);
        assert!(e.leaves(&v).iter().all(|u| e.project(u) == v));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Embedding::new(2, 0).is_err());
        assert!(Embedding::new(0, 2).is_err());
        assert!(Embedding::new(16, 16).is_err());
    }
}
