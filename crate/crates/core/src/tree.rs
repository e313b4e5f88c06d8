//! The Cayley tree `Γ^k` addressed by root paths, and its dual description as
//! reduced words in the free product of `k + 1` copies of `Z/2`.
//!
//! The root has children `0..=k`; every other vertex has children `0..k`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The first `depth` levels of `Γ^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeShape {
    pub k: u32,
    pub depth: u32,
}

impl TreeShape {
    pub fn new(k: u32, depth: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput(
                "branching order k must be at least 1".into(),
            ));
        }
        Ok(TreeShape { k, depth })
    }

    /// `|W_n|`: 1 for `n = 0`, otherwise `(k + 1) k^(n - 1)`.
    pub fn sphere_size(&self, n: u32) -> u64 {
        if n == 0 {
            1
        } else {
            (self.k as u64 + 1) * (self.k as u64).pow(n - 1)
        }
    }

    /// `|V_n|`, root included.
    pub fn ball_size(&self, n: u32) -> u64 {
        (0..=n).map(|m| self.sphere_size(m)).sum()
    }

    fn check_level(&self, n: u32) -> Result<()> {
        if n > self.depth {
            return Err(Error::InvalidInput(format!(
                "level {n} exceeds tree depth {}",
                self.depth
            )));
        }
        Ok(())
    }

    /// `W_n`, in lexicographic address order.
    pub fn sphere(&self, n: u32) -> Result<Vec<TreeVertex>> {
        self.check_level(n)?;
        let mut level = vec![TreeVertex::root()];
        for _ in 0..n {
            level = level
                .iter()
                .flat_map(|x| self.direct_successors(x))
                .collect();
        }
        Ok(level)
    }

    /// `V_n`, level by level, so every parent precedes its children.
    pub fn ball(&self, n: u32) -> Result<Vec<TreeVertex>> {
        self.check_level(n)?;
        let mut out = vec![TreeVertex::root()];
        let mut start = 0;
        for _ in 0..n {
            let end = out.len();
            for i in start..end {
                let children = self.direct_successors(&out[i]);
                out.extend(children);
            }
            start = end;
        }
        Ok(out)
    }

    /// `L_n` as `(parent, child)` pairs, in the child order of [`Self::ball`].
    pub fn edges(&self, n: u32) -> Result<Vec<(TreeVertex, TreeVertex)>> {
        Ok(self
            .ball(n)?
            .into_iter()
            .filter_map(|y| y.parent().map(|x| (x, y)))
            .collect())
    }

    /// `S(x)`: `k + 1` vertices at the root, `k` elsewhere.
    pub fn direct_successors(&self, x: &TreeVertex) -> Vec<TreeVertex> {
        let count = if x.is_root() { self.k + 1 } else { self.k };
        (0..count).map(|i| x.child(i)).collect()
    }

    pub fn contains(&self, x: &TreeVertex) -> bool {
        x.level() <= self.depth
            && x.address.iter().enumerate().all(
                |(i, &c)| {
                    if i == 0 {
                        c <= self.k
                    } else {
                        c < self.k
                    }
                },
            )
    }

    /// The reduced word of `x`. Child `i` of the root appends `a_(i+1)`; child
    /// `i` of any other vertex appends the `i`-th generator different from the
    /// last letter.
    pub fn word_of_vertex(&self, x: &TreeVertex) -> GroupWord {
        let mut letters: Vec<u32> = Vec::with_capacity(x.address.len());
        for &step in &x.address {
            let letter = match letters.last() {
                None => step + 1,
                Some(&last) => {
                    let candidate = step + 1;
                    if candidate >= last {
                        candidate + 1
                    } else {
                        candidate
                    }
                }
            };
            letters.push(letter);
        }
        GroupWord { letters }
    }

    /// Inverse of [`Self::word_of_vertex`].
    pub fn vertex_of_word(&self, w: &GroupWord) -> Result<TreeVertex> {
        let mut address = Vec::with_capacity(w.letters.len());
        let mut last: Option<u32> = None;
        for &letter in &w.letters {
            if letter == 0 || letter > self.k + 1 {
                return Err(Error::InvalidInput(format!(
                    "generator a_{letter} does not exist for k = {}",
                    self.k
                )));
            }
            let step = match last {
                None => letter - 1,
                Some(l) if l == letter => {
                    return Err(Error::InvalidInput("word is not reduced".into()))
                }
                Some(l) if letter > l => letter - 2,
                Some(_) => letter - 1,
            };
            address.push(step);
            last = Some(letter);
        }
        Ok(TreeVertex { address })
    }
}

/// A vertex, named by its path from the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeVertex {
    address: Vec<u32>,
}

impl TreeVertex {
    pub fn root() -> Self {
        TreeVertex {
            address: Vec::new(),
        }
    }

    pub fn from_address(address: Vec<u32>) -> Self {
        TreeVertex { address }
    }

    pub fn address(&self) -> &[u32] {
        &self.address
    }

    /// `|x| = d(x, x^0)`.
    pub fn level(&self) -> u32 {
        self.address.len() as u32
    }

    pub fn is_root(&self) -> bool {
        self.address.is_empty()
    }

    pub fn child(&self, i: u32) -> TreeVertex {
        let mut address = self.address.clone();
        address.push(i);
        TreeVertex { address }
    }

    pub fn parent(&self) -> Option<TreeVertex> {
        if self.is_root() {
            return None;
        }
        Some(TreeVertex {
            address: self.address[..self.address.len() - 1].to_vec(),
        })
    }

    /// Parity of the word length, which equals the level.
    pub fn parity(&self) -> Parity {
        Parity::of_length(self.address.len())
    }
}

/// Dotted path notation: `""` is the root, `"0.1.0"` a level-3 vertex.
impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.address.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl FromStr for TreeVertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(TreeVertex::root());
        }
        let address = s
            .split('.')
            .map(|part| {
                part.parse::<u32>()
                    .map_err(|_| Error::InvalidInput(format!("bad vertex address {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TreeVertex { address })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_length(len: usize) -> Parity {
        if len.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// A word over generators `a_1..a_(k+1)`, stored as their indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupWord {
    letters: Vec<u32>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord {
            letters: Vec::new(),
        }
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// No letter repeats its neighbour (each generator is an involution).
    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] != w[1])
    }

    /// Even words form the index-2 subgroup `G*_k`.
    pub fn parity(&self) -> Parity {
        Parity::of_length(self.letters.len())
    }

    /// Product in the free product, cancelling adjacent equal letters.
    pub fn multiply(&self, other: &GroupWord) -> GroupWord {
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last() == Some(&l) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        GroupWord { letters }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_sizes() {
        let t = TreeShape::new(2, 3).unwrap();
        assert_eq!(t.sphere(0).unwrap(), vec![TreeVertex::root()]);
        assert_eq!(t.sphere(2).unwrap().len(), 6);
        assert_eq!(TreeShape::new(1, 3).unwrap().sphere(3).unwrap().len(), 2);
        assert!(t.sphere(4).is_err());
    }

    #[test]
    fn ball_and_edges() {
        let t = TreeShape::new(2, 2).unwrap();
        assert_eq!(t.ball(2).unwrap().len(), 10);
        assert_eq!(t.edges(2).unwrap().len(), 9);
        assert_eq!(
            TreeShape::new(1, 1)
                .unwrap()
                .direct_successors(&TreeVertex::root())
                .len(),
            2
        );
    }

    #[test]
    fn words_of_small_vertices() {
        let t = TreeShape::new(2, 3).unwrap();
        let root = t.word_of_vertex(&TreeVertex::root());
        assert!(root.is_empty());
        assert_eq!(root.parity(), Parity::Even);
        for x in t.sphere(1).unwrap() {
            let w = t.word_of_vertex(&x);
            assert_eq!(w.len(), 1);
            assert_eq!(w.parity(), Parity::Odd);
        }
        // Children of a_2 skip the letter 2.
        let x = TreeVertex::from_address(vec![1, 1]);
        assert_eq!(t.word_of_vertex(&x).letters(), &[2, 3]);
        let x = TreeVertex::from_address(vec![1, 0]);
        assert_eq!(t.word_of_vertex(&x).letters(), &[2, 1]);
    }

    #[test]
    fn line_alternates_parity() {
        let t = TreeShape::new(1, 6).unwrap();
        for n in 0..=6 {
            for x in t.sphere(n).unwrap() {
                assert_eq!(t.word_of_vertex(&x).parity(), Parity::of_length(n as usize));
            }
        }
    }

    #[test]
    fn address_round_trip() {
        let x: TreeVertex = "0.1.0".parse().unwrap();
        assert_eq!(x.address(), &[0, 1, 0]);
        assert_eq!(x.to_string(), "0.1.0");
        assert!("".parse::<TreeVertex>().unwrap().is_root());
        assert!("0.x".parse::<TreeVertex>().is_err());
    }

    #[test]
    fn word_product_cancels() {
        let a = GroupWord {
            letters: vec![1, 2],
        };
        let b = GroupWord {
            letters: vec![2, 1],
        };
        assert!(a.multiply(&b).is_empty());
    }
}
