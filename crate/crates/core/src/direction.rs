//! Directions: nonempty subsets of coordinate indices.
//!
//! Indices are zero-based column positions. A `Direction` is stored as a
//! sorted, deduplicated index list so that equality, hashing and ordering are
//! canonical. Ordering is lexicographic on the index list.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Direction(Vec<usize>);

impl Direction {
    /// Builds a direction from arbitrary indices (sorted and deduplicated).
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::param("direction must contain at least one index"));
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(Direction(indices))
    }

    /// Internal constructor for index lists already known to be sorted,
    /// unique and nonempty.
    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(!indices.is_empty());
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Direction(indices)
    }

    pub fn singleton(index: usize) -> Self {
        Direction(vec![index])
    }

    /// The full index set `{0, .., d-1}`.
    pub fn full(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        Ok(Direction((0..d).collect()))
    }

    /// Contiguous range `{start, .., start + len - 1}`.
    pub fn range(start: usize, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::param("direction must contain at least one index"));
        }
        Ok(Direction((start..start + len).collect()))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// Largest index plus one.
    pub fn min_dimension(&self) -> usize {
        self.0[self.0.len() - 1] + 1
    }

    pub fn is_subset_of(&self, other: &Direction) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for &i in &self.0 {
            for &j in it.by_ref() {
                if j == i {
                    continue 'outer;
                }
                if j > i {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn is_strict_subset_of(&self, other: &Direction) -> bool {
        self.len() < other.len() && self.is_subset_of(other)
    }

    /// Indices of `{0, .., d-1}` not in this direction (may be empty).
    pub fn complement(&self, d: usize) -> Vec<usize> {
        (0..d).filter(|i| !self.contains(*i)).collect()
    }

    /// Indicator mask of length `d`.
    pub fn mask(&self, d: usize) -> Vec<bool> {
        let mut m = vec![false; d];
        for &i in &self.0 {
            if i < d {
                m[i] = true;
            }
        }
        m
    }

    /// Barycenter `e(beta)/|beta|` of the face, as a length-`d` point.
    pub fn barycenter(&self, d: usize) -> Result<Vec<f64>> {
        if self.min_dimension() > d {
            return Err(Error::Shape(format!(
                "direction {self} does not fit in dimension {d}"
            )));
        }
        let w = 1.0 / self.len() as f64;
        let mut v = vec![0.0; d];
        for &i in &self.0 {
            v[i] = w;
        }
        Ok(v)
    }

    /// Parses a comma-separated index list such as `"0,2,5"`.
    pub fn parse_list(text: &str) -> Result<Self> {
        let indices = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::param(format!("invalid index '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Direction::new(indices)
    }
}

impl TryFrom<Vec<usize>> for Direction {
    type Error = Error;

    fn try_from(value: Vec<usize>) -> Result<Self> {
        Direction::new(value)
    }
}

impl From<Direction> for Vec<usize> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}
