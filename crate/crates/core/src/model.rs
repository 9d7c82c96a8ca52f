//! Vertices of the rooted d-ary tree, drift parameters and step laws.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::rng::{below, unit_f64};

/// A vertex of the rooted d-ary tree, written as its path of child
/// indices from the root. Indices are 1-based; the empty path is the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Vertex(Vec<u8>);

impl Vertex {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn from_path(path: impl Into<Vec<u8>>) -> Self {
        Self(path.into())
    }

    pub fn path(&self) -> &[u8] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` at the root.
    pub fn parent(&self) -> Option<Vertex> {
        let (_, rest) = self.0.split_last()?;
        Some(Self(rest.to_vec()))
    }

    pub fn child(&self, k: u8) -> Vertex {
        let mut path = self.0.clone();
        path.push(k);
        Self(path)
    }

    pub fn push(&mut self, k: u8) {
        self.0.push(k);
    }

    pub fn pop(&mut self) -> Option<u8> {
        self.0.pop()
    }

    /// True when `self` lies in the subtree rooted at `ancestor` (inclusive).
    pub fn is_descendant_of(&self, ancestor: &Vertex) -> bool {
        self.0.starts_with(&ancestor.0)
    }

    /// Deepest common ancestor.
    pub fn meet(&self, other: &Vertex) -> Vertex {
        let n = self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count();
        Self(self.0[..n].to_vec())
    }

    /// Checks every index lies in `1..=d`.
    pub fn is_valid_for(&self, d: u32) -> bool {
        self.0.iter().all(|&k| k >= 1 && u32::from(k) <= d)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "root" || s.is_empty() {
            return Ok(Self::root());
        }
        s.split('.')
            .map(|part| match part.parse::<u8>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(Error::Parse {
                    what: "vertex",
                    input: s.to_owned(),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// Probability that a p-biased walk ever reaches its parent: p/(1-p) below
/// drift 1/2 and 1 otherwise.
pub fn rho_of_p(p: f64) -> Result<f64> {
    let p = check_probability("p", p)?;
    Ok(if p < 0.5 { p / (1.0 - p) } else { 1.0 })
}

/// Inverse of [`rho_of_p`] on [0, 1/2).
pub fn p_of_rho(rho: f64) -> Result<f64> {
    let rho = check_probability("rho", rho)?;
    Ok(rho / (1.0 + rho))
}

/// Tree degree and drift. `rho` is derived from `p` and always consistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    d: u32,
    p: f64,
    rho: f64,
}

/// Largest supported degree; child indices are stored as bytes.
pub const MAX_DEGREE: u32 = 255;

impl ModelParams {
    pub fn new(d: u32, p: f64) -> Result<Self> {
        if !(2..=MAX_DEGREE).contains(&d) {
            return Err(Error::Config(format!(
                "tree degree d = {d} must lie in 2..={MAX_DEGREE}"
            )));
        }
        let rho = rho_of_p(p)?;
        Ok(Self { d, p, rho })
    }

    /// Parameters with upward probability `rho` (drift p = rho/(1+rho)).
    pub fn from_rho(d: u32, rho: f64) -> Result<Self> {
        let p = p_of_rho(rho)?;
        let mut params = Self::new(d, p)?;
        // keep the caller's rho exactly rather than the round trip
        if rho < 1.0 {
            params.rho = rho;
        }
        Ok(params)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Same drift on a tree of another degree.
    pub fn with_degree(&self, d: u32) -> Result<Self> {
        let mut params = Self::new(d, self.p)?;
        params.rho = self.rho;
        Ok(params)
    }
}

/// A single move on the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    Parent,
    /// 1-based child index.
    Child(u8),
}

impl Step {
    pub fn is_up(self) -> bool {
        matches!(self, Step::Parent)
    }
}

#[inline]
fn child_from_unit(u: f64, lo: f64, d: u32) -> u8 {
    // u in [lo, 1): split the remaining mass into d equal cells
    let k = ((u - lo) / (1.0 - lo) * f64::from(d)) as u32;
    (k.min(d - 1) + 1) as u8
}

/// FM step law from one random word: forced uniform child at the root,
/// otherwise parent with probability p and each child with (1-p)/d.
#[inline]
pub fn fm_step_from_word(at_root: bool, params: &ModelParams, word: u64) -> Step {
    if at_root {
        return Step::Child(below(word, u64::from(params.d)) as u8 + 1);
    }
    let u = unit_f64(word);
    if u < params.p {
        Step::Parent
    } else {
        Step::Child(child_from_unit(u, params.p, params.d))
    }
}

/// Up-instruction law: parent (the `0` instruction) with probability rho,
/// child k with probability (1-rho)/d.
#[inline]
pub fn up_instruction_from_word(params: &ModelParams, word: u64) -> Step {
    let u = unit_f64(word);
    if u < params.rho {
        Step::Parent
    } else {
        Step::Child(child_from_unit(u, params.rho, params.d))
    }
}

/// Down-instruction law: uniform child.
#[inline]
pub fn down_instruction_from_word(d: u32, word: u64) -> u8 {
    below(word, u64::from(d)) as u8 + 1
}

/// One step of an awake FM(d,p) frog at `v`.
pub fn sample_fm_step<R: Rng + ?Sized>(v: &Vertex, params: &ModelParams, rng: &mut R) -> Vertex {
    match fm_step_from_word(v.is_root(), params, rng.random()) {
        Step::Parent => v.parent().expect("non-root vertex has a parent"),
        Step::Child(k) => v.child(k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::rng::StreamKind;

    #[test]
    fn rho_examples() {
        assert!((rho_of_p(1.0 / 3.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(rho_of_p(0.5).unwrap(), 1.0);
        assert_eq!(rho_of_p(0.9).unwrap(), 1.0);
        // 0.4155 / 0.5845
        assert!((rho_of_p(0.4155).unwrap() - 0.710_863_986_313_088).abs() < 1e-12);
        assert!(rho_of_p(-0.1).is_err());
        assert!(rho_of_p(1.5).is_err());
        assert!(rho_of_p(f64::NAN).is_err());
    }

    #[test]
    fn p_examples() {
        assert!((p_of_rho(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p_of_rho(0.0).unwrap(), 0.0);
        // 0.7107 / 1.7107
        assert!((p_of_rho(0.7107).unwrap() - 0.415_443_970_304_553_66).abs() < 1e-12);
        assert!(p_of_rho(1.01).is_err());
    }

    #[test]
    fn params_validate() {
        assert!(ModelParams::new(1, 0.3).is_err());
        assert!(ModelParams::new(2, 1.2).is_err());
        let m = ModelParams::new(3, 0.25).unwrap();
        assert_eq!(m.d(), 3);
        assert!((m.rho() - 1.0 / 3.0).abs() < 1e-15);
        let m = ModelParams::from_rho(2, 0.72).unwrap();
        assert_eq!(m.rho(), 0.72);
    }

    #[test]
    fn vertex_navigation() {
        let v: Vertex = "1.2.2".parse().unwrap();
        assert_eq!(v.depth(), 3);
        assert_eq!(v.parent().unwrap().to_string(), "1.2");
        assert_eq!(Vertex::root().parent(), None);
        assert_eq!(v.meet(&"1.3".parse().unwrap()).to_string(), "1");
        assert!(v.is_descendant_of(&"1.2".parse().unwrap()));
        assert!(!v.is_valid_for(1));
        assert!("1.0".parse::<Vertex>().is_err());
        assert_eq!("root".parse::<Vertex>().unwrap(), Vertex::root());
    }

    #[test]
    fn root_step_is_uniform_child() {
        let params = ModelParams::new(3, 0.9).unwrap();
        let mut rng = substream(1, StreamKind::Scheduler);
        let mut counts = [0u32; 3];
        let n = 30_000;
        for _ in 0..n {
            let w = sample_fm_step(&Vertex::root(), &params, &mut rng);
            assert_eq!(w.depth(), 1);
            counts[usize::from(w.path()[0]) - 1] += 1;
        }
        let se = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((f64::from(c) - n as f64 / 3.0).abs() < 3.0 * se);
        }
    }

    #[test]
    fn zero_drift_never_goes_up() {
        let params = ModelParams::new(2, 0.0).unwrap();
        let mut rng = substream(2, StreamKind::Scheduler);
        let v: Vertex = "2.1".parse().unwrap();
        for _ in 0..10_000 {
            assert_eq!(sample_fm_step(&v, &params, &mut rng).depth(), 3);
        }
    }

    #[test]
    fn parent_frequency_matches_drift() {
        let params = ModelParams::new(2, 0.3).unwrap();
        let mut rng = substream(3, StreamKind::Scheduler);
        let v: Vertex = "1.1.2".parse().unwrap();
        let n = 100_000;
        let ups = (0..n)
            .filter(|_| sample_fm_step(&v, &params, &mut rng).depth() == 2)
            .count();
        let se = (0.3 * 0.7 / n as f64).sqrt();
        assert!((ups as f64 / n as f64 - 0.3).abs() < 3.0 * se);
    }

    #[test]
    fn up_instruction_law() {
        let params = ModelParams::from_rho(2, 1.0).unwrap();
        for i in 0..1000 {
            assert_eq!(up_instruction_from_word(&params, crate::rng::mix64(i)), Step::Parent);
        }
        let params = ModelParams::from_rho(2, 0.6).unwrap();
        let n = 100_000u64;
        let mut counts = [0u64; 3];
        for i in 0..n {
            match up_instruction_from_word(&params, crate::rng::mix64(i)) {
                Step::Parent => counts[0] += 1,
                Step::Child(k) => counts[usize::from(k)] += 1,
            }
        }
        for (c, p) in counts.iter().zip([0.6, 0.2, 0.2]) {
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() < 3.0 * se, "{counts:?}");
        }
    }

    proptest::proptest! {
        #[test]
        fn rho_p_roundtrip(p in 0.0f64..0.5) {
            let back = p_of_rho(rho_of_p(p).unwrap()).unwrap();
            proptest::prop_assert!((back - p).abs() <= 1e-12 * p.max(1e-300));
        }

        #[test]
        fn step_words_stay_in_range(word: u64, d in 2u32..=64, p in 0.0f64..=1.0) {
            let params = ModelParams::new(d, p).unwrap();
            for at_root in [true, false] {
                if let Step::Child(k) = fm_step_from_word(at_root, &params, word) {
                    proptest::prop_assert!(k >= 1 && u32::from(k) <= d);
                }
            }
            if let Step::Child(k) = up_instruction_from_word(&params, word) {
                proptest::prop_assert!(k >= 1 && u32::from(k) <= d);
            }
            let k = down_instruction_from_word(d, word);
            proptest::prop_assert!(k >= 1 && u32::from(k) <= d);
        }
    }
}
