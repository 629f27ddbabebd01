use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::Pattern;

/// A finite map from outcome patterns to probabilities, tagged with the input
/// pattern that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    input: Pattern,
    entries: BTreeMap<Pattern, f64>,
}

impl OutcomeDistribution {
    pub fn new(input: Pattern, entries: BTreeMap<Pattern, f64>) -> Self {
        Self { input, entries }
    }

    pub fn input(&self) -> &Pattern {
        &self.input
    }

    /// Total number of injected photons.
    pub fn n(&self) -> usize {
        self.input.total()
    }

    /// Probability of `pattern`; zero for patterns outside the stored support.
    pub fn get(&self, pattern: &Pattern) -> f64 {
        self.entries.get(pattern).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending lexicographic order of pattern.
    pub fn iter(&self) -> impl Iterator<Item = (&Pattern, f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn entries(&self) -> &BTreeMap<Pattern, f64> {
        &self.entries
    }

    pub fn sum(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Mass on outcomes whose total equals `n`.
    pub fn mass_with_total(&self, n: usize) -> f64 {
        self.entries
            .iter()
            .filter(|(k, _)| k.total() == n)
            .map(|(_, &v)| v)
            .sum()
    }

    /// The conditional distribution given that the outcome total equals `n`.
    pub fn postselected(&self, n: usize) -> Result<Self> {
        let mass = self.mass_with_total(n);
        if !(mass > 0.0) {
            return Err(Error::Domain(format!("no probability mass on outcomes with total {n}")));
        }
        let entries = self
            .entries
            .iter()
            .filter(|(k, _)| k.total() == n)
            .map(|(k, &v)| (k.clone(), v / mass))
            .collect();
        Ok(Self {
            input: self.input.clone(),
            entries,
        })
    }

    /// Drops outcomes below `threshold`. Intended for display only.
    pub fn pruned(&self, threshold: f64) -> Self {
        Self {
            input: self.input.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(_, &v)| v >= threshold)
                .map(|(k, &v)| (k.clone(), v))
                .collect(),
        }
    }

    /// Applies `f` to every probability.
    pub fn map_probabilities(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            input: self.input.clone(),
            entries: self.entries.iter().map(|(k, &v)| (k.clone(), f(v))).collect(),
        }
    }

    /// Total-variation distance `½ Σ |p − q|` over the union of supports.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (k, &p) in &self.entries {
            acc += (p - other.get(k)).abs();
        }
        for (k, &q) in &other.entries {
            if !self.entries.contains_key(k) {
                acc += q.abs();
            }
        }
        0.5 * acc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DistributionFile::from(self)).expect("distribution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DistributionFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.try_into()
    }
}

/// JSON layout: `{"input": […], "outcomes": [{"pattern": […], "p": x}, …]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct DistributionFile {
    pub input: Pattern,
    pub outcomes: Vec<OutcomeEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OutcomeEntry {
    pub pattern: Pattern,
    pub p: f64,
}

impl From<&OutcomeDistribution> for DistributionFile {
    fn from(d: &OutcomeDistribution) -> Self {
        Self {
            input: d.input.clone(),
            outcomes: d
                .iter()
                .map(|(k, p)| OutcomeEntry {
                    pattern: k.clone(),
                    p,
                })
                .collect(),
        }
    }
}

impl TryFrom<DistributionFile> for OutcomeDistribution {
    type Error = Error;

    fn try_from(file: DistributionFile) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for OutcomeEntry { pattern, p } in file.outcomes {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Format(format!("invalid probability {p} for {pattern}")));
            }
            if pattern.modes() != file.input.modes() {
                return Err(Error::Format(format!(
                    "outcome {pattern} has {} modes, input has {}",
                    pattern.modes(),
                    file.input.modes()
                )));
            }
            if entries.insert(pattern.clone(), p).is_some() {
                return Err(Error::Format(format!("duplicate outcome {pattern}")));
            }
        }
        Ok(Self {
            input: file.input,
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OutcomeDistribution {
        let mut m = BTreeMap::new();
        m.insert(Pattern::from([2, 0]), 0.25);
        m.insert(Pattern::from([1, 0]), 0.25);
        m.insert(Pattern::from([0, 2]), 0.5);
        OutcomeDistribution::new(Pattern::from([1, 1]), m)
    }

    #[test]
    fn json_roundtrip() {
        let d = sample();
        let back = OutcomeDistribution::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_json(), d.to_json());
    }

    #[test]
    fn json_layout() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["input"], serde_json::json!([1, 1]));
        assert_eq!(v["outcomes"][0]["pattern"], serde_json::json!([0, 2]));
        assert_eq!(v["outcomes"][0]["p"], serde_json::json!(0.5));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(OutcomeDistribution::from_json(
            r#"{"input":[1],"outcomes":[{"pattern":[1],"p":-0.1}]}"#
        )
        .is_err());
        assert!(OutcomeDistribution::from_json(
            r#"{"input":[1],"outcomes":[{"pattern":[1,0],"p":0.1}]}"#
        )
        .is_err());
        assert!(OutcomeDistribution::from_json(
            r#"{"input":[1],"outcomes":[{"pattern":[1],"p":0.1},{"pattern":[1],"p":0.1}]}"#
        )
        .is_err());
    }

    #[test]
    fn postselection_renormalizes() {
        let d = sample();
        assert!((d.mass_with_total(2) - 0.75).abs() < 1e-15);
        let post = d.postselected(2).unwrap();
        assert!((post.get(&Pattern::from([0, 2])) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(post.get(&Pattern::from([1, 0])), 0.0);
        assert!(d.postselected(5).is_err());
    }

    #[test]
    fn tv_distance_examples() {
        let d = sample();
        assert_eq!(d.tv_distance(&d), 0.0);
        let mut m = BTreeMap::new();
        m.insert(Pattern::from([3, 3]), 1.0);
        let far = OutcomeDistribution::new(Pattern::from([1, 1]), m);
        assert!((d.tv_distance(&far) - 1.0).abs() < 1e-15);
    }
}
