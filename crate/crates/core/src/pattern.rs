use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Per-mode photon numbers or photocounts.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pattern(Vec<usize>);

impl Pattern {
    pub fn new(counts: Vec<usize>) -> Self {
        Self(counts)
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max_count(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Relabels modes: entry `j` of the result is entry `perm[j]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&p| self.0[p]).collect())
    }
}

impl From<Vec<usize>> for Pattern {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[usize; N]> for Pattern {
    fn from(v: [usize; N]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Parses comma-separated counts such as `"1,1,0"`; whitespace is ignored.
impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self(Vec::new()));
        }
        s.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parameter(format!("bad count {tok:?} in pattern {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

/// All length-`modes` patterns with total `n` and entries at most
/// `per_mode_cap`, in ascending lexicographic order.
pub fn enumerate_outcomes(n: usize, modes: usize, per_mode_cap: usize) -> Vec<Pattern> {
    fn rec(rest: usize, slot: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Pattern>) {
        let remaining_slots = cur.len() - slot;
        if remaining_slots == 1 {
            if rest <= cap {
                cur[slot] = rest;
                out.push(Pattern(cur.clone()));
            }
            return;
        }
        // Later slots can absorb at most cap * (remaining_slots - 1).
        let min_here = rest.saturating_sub(cap * (remaining_slots - 1));
        for c in min_here..=rest.min(cap) {
            cur[slot] = c;
            rec(rest - c, slot + 1, cap, cur, out);
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        if n == 0 {
            out.push(Pattern(Vec::new()));
        }
        return out;
    }
    rec(n, 0, per_mode_cap, &mut vec![0; modes], &mut out);
    out
}
