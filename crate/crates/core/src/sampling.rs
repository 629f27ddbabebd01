//! Exact sampling from outcome distributions, postselection on the total
//! count, and goodness-of-fit checks.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::detector::DetectorModel;
use crate::distribution::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::montecarlo::simulate_counts;
use crate::pattern::Pattern;
use crate::rng::{shard_rng, shard_sizes, DEFAULT_SHARDS, GENERATOR};

/// Tolerated deviation of a distribution's total mass from one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Bins with a smaller expected count are pooled before the chi-square test.
pub const MIN_EXPECTED: f64 = 5.0;

/// Vose's alias table for O(1) draws from a finite distribution.
#[derive(Clone, Debug)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || !(total > 0.0) {
            return Err(Error::Domain("cannot sample from an empty distribution".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Domain(format!("invalid weight {w}")));
        }
        let n = weights.len();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![1.0; n];
        let mut alias: Vec<usize> = (0..n).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers differ from one only by rounding.
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        Ok(Self { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub pattern: Pattern,
    pub count: u64,
    /// Exact probability of the pattern under the reference distribution.
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins after pooling.
    pub bins: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Postselection {
    pub total: usize,
    /// Trials before filtering.
    pub offered: u64,
    pub accepted: u64,
    pub acceptance: f64,
    pub acceptance_stderr: f64,
    /// Set when no sample survived the filter.
    pub empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub distribution: String,
    pub generator: String,
    pub seed: u64,
    pub shards: usize,
    pub trials: u64,
    pub entries: Vec<SampleEntry>,
    pub tv_distance: f64,
    pub chi_square: ChiSquare,
    pub postselection: Option<Postselection>,
}

impl SampleReport {
    /// Builds a report from observed counts against the exact `reference`.
    pub fn from_counts(
        distribution: String,
        reference: &OutcomeDistribution,
        counts: &BTreeMap<Pattern, u64>,
        seed: u64,
    ) -> Self {
        let mut entries: BTreeMap<Pattern, SampleEntry> = reference
            .iter()
            .map(|(k, p)| {
                (
                    k.clone(),
                    SampleEntry {
                        pattern: k.clone(),
                        count: 0,
                        expected: p,
                    },
                )
            })
            .collect();
        for (k, &c) in counts {
            entries
                .entry(k.clone())
                .or_insert_with(|| SampleEntry {
                    pattern: k.clone(),
                    count: 0,
                    expected: 0.0,
                })
                .count += c;
        }
        let entries: Vec<SampleEntry> = entries.into_values().collect();
        let trials = entries.iter().map(|e| e.count).sum();
        let mut report = Self {
            distribution,
            generator: GENERATOR.to_string(),
            seed,
            shards: DEFAULT_SHARDS,
            trials,
            entries,
            tv_distance: 0.0,
            chi_square: ChiSquare {
                statistic: 0.0,
                dof: 0,
                p_value: 1.0,
                bins: 0,
                note: None,
            },
            postselection: None,
        };
        report.refresh_statistics();
        report
    }

    fn refresh_statistics(&mut self) {
        self.tv_distance = if self.trials == 0 {
            0.0
        } else {
            let t = self.trials as f64;
            0.5 * self
                .entries
                .iter()
                .map(|e| (e.count as f64 / t - e.expected).abs())
                .sum::<f64>()
        };
        let cells: Vec<(u64, f64)> = self.entries.iter().map(|e| (e.count, e.expected)).collect();
        self.chi_square = pearson(&cells, self.trials);
    }

    pub fn count(&self, pattern: &Pattern) -> u64 {
        self.entries
            .iter()
            .find(|e| &e.pattern == pattern)
            .map_or(0, |e| e.count)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV with header `pattern,count,expected`, where `expected` is the
    /// expected count `trials · p`.
    pub fn to_csv(&self, fmt_value: impl Fn(f64) -> String) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["pattern", "count", "expected"]).expect("in-memory write");
        for e in &self.entries {
            w.write_record([
                e.pattern.to_string(),
                e.count.to_string(),
                fmt_value(e.expected * self.trials as f64),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }
}

/// Normalised weights in outcome order, with any residual below
/// [`NORMALIZATION_TOL`] moved onto the most likely outcome.
fn normalized(dist: &OutcomeDistribution) -> Result<(Vec<Pattern>, Vec<f64>)> {
    if dist.is_empty() {
        return Err(Error::Domain("cannot sample from an empty distribution".into()));
    }
    let (patterns, mut weights): (Vec<Pattern>, Vec<f64>) = dist.iter().map(|(k, p)| (k.clone(), p)).unzip();
    let residual = 1.0 - weights.iter().sum::<f64>();
    if !(residual.abs() <= NORMALIZATION_TOL) {
        return Err(Error::Domain(format!(
            "distribution sums to {} (tolerance {NORMALIZATION_TOL:e})",
            1.0 - residual
        )));
    }
    let top = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    weights[top] += residual;
    Ok((patterns, weights))
}

/// Draws shard-parallel counts from an alias table.
fn draw_counts(table: &AliasTable, trials: u64, seed: u64) -> Vec<u64> {
    shard_sizes(trials, DEFAULT_SHARDS)
        .into_par_iter()
        .enumerate()
        .map(|(shard, n)| {
            let mut rng = shard_rng(seed, shard);
            let mut counts = vec![0u64; table.len()];
            for _ in 0..n {
                counts[table.draw(&mut rng)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; table.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// `trials` independent draws from `dist`. The report is a function of
/// `(dist, trials, seed)` alone.
pub fn sample(dist: &OutcomeDistribution, trials: u64, seed: u64) -> Result<SampleReport> {
    let (patterns, weights) = normalized(dist)?;
    let table = AliasTable::new(&weights)?;
    let counts = draw_counts(&table, trials, seed);
    let observed: BTreeMap<Pattern, u64> = patterns.into_iter().zip(counts).filter(|(_, c)| *c > 0).collect();
    Ok(SampleReport::from_counts(
        format!("input {}", dist.input()),
        dist,
        &observed,
        seed,
    ))
}

/// Samples ideal outcomes from `ideal` and passes each through simulated
/// detectors; `reference` is the exact count distribution used for the
/// report's statistics.
pub fn sample_through_detectors(
    ideal: &OutcomeDistribution,
    model: &DetectorModel,
    reference: &OutcomeDistribution,
    trials: u64,
    seed: u64,
) -> Result<SampleReport> {
    model.validate()?;
    let (patterns, weights) = normalized(ideal)?;
    let table = AliasTable::new(&weights)?;
    let observed = shard_sizes(trials, DEFAULT_SHARDS)
        .into_par_iter()
        .enumerate()
        .map(|(shard, n)| {
            let mut rng = shard_rng(seed, shard);
            let mut counts: BTreeMap<Pattern, u64> = BTreeMap::new();
            for _ in 0..n {
                let m = &patterns[table.draw(&mut rng)];
                let k: Vec<usize> = m.counts().iter().map(|&mi| simulate_counts(model, mi, &mut rng)).collect();
                *counts.entry(Pattern::new(k)).or_insert(0) += 1;
            }
            counts
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            a
        });
    Ok(SampleReport::from_counts(
        format!("input {} via {model}", ideal.input()),
        reference,
        &observed,
        seed,
    ))
}

/// Keeps only samples whose total count is `n`. Expected probabilities are
/// renormalised over that sector; the acceptance fraction estimates the
/// postselection efficiency. An empty result is flagged, not an error.
pub fn postselect(report: &SampleReport, n: usize) -> SampleReport {
    let entries: Vec<SampleEntry> = report
        .entries
        .iter()
        .filter(|e| e.pattern.total() == n)
        .cloned()
        .collect();
    let accepted: u64 = entries.iter().map(|e| e.count).sum();
    let mass: f64 = entries.iter().map(|e| e.expected).sum();
    let entries = entries
        .into_iter()
        .map(|mut e| {
            e.expected = if mass > 0.0 { e.expected / mass } else { 0.0 };
            e
        })
        .collect();
    let offered = report.trials;
    let acceptance = if offered == 0 { 0.0 } else { accepted as f64 / offered as f64 };
    let mut out = SampleReport {
        distribution: format!("{} | total = {n}", report.distribution),
        trials: accepted,
        entries,
        postselection: Some(Postselection {
            total: n,
            offered,
            accepted,
            acceptance,
            acceptance_stderr: if offered == 0 {
                0.0
            } else {
                (acceptance * (1.0 - acceptance) / offered as f64).sqrt()
            },
            empty: accepted == 0,
        }),
        ..report.clone()
    };
    out.refresh_statistics();
    out
}

/// Pearson goodness of fit of the report's counts against `dist`.
pub fn chi_square_test(report: &SampleReport, dist: &OutcomeDistribution) -> ChiSquare {
    let mut cells: Vec<(u64, f64)> = dist.iter().map(|(k, p)| (report.count(k), p)).collect();
    for e in &report.entries {
        if dist.entries().get(&e.pattern).is_none() && e.count > 0 {
            cells.push((e.count, 0.0));
        }
    }
    pearson(&cells, report.trials)
}

/// Pearson statistic over `(observed, probability)` cells, pooling cells
/// with expected count below [`MIN_EXPECTED`].
fn pearson(cells: &[(u64, f64)], trials: u64) -> ChiSquare {
    let t = trials as f64;
    if trials == 0 {
        return ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
            bins: 0,
            note: Some("no samples".into()),
        };
    }
    if cells.iter().any(|&(o, p)| o > 0 && p <= 0.0) {
        return ChiSquare {
            statistic: f64::INFINITY,
            dof: cells.len().saturating_sub(1),
            p_value: 0.0,
            bins: cells.len(),
            note: Some("samples observed on a zero-probability outcome".into()),
        };
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    let mut pooled_cells = 0usize;
    for &(o, p) in cells.iter().filter(|&&(_, p)| p > 0.0) {
        let e = p * t;
        if e < MIN_EXPECTED {
            pool.0 += o as f64;
            pool.1 += e;
            pooled_cells += 1;
        } else {
            bins.push((o as f64, e));
        }
    }
    let mut note = None;
    if pooled_cells > 0 {
        note = Some(format!(
            "{pooled_cells} outcomes with expected count below {MIN_EXPECTED} pooled"
        ));
        if pool.1 >= MIN_EXPECTED || bins.is_empty() {
            bins.push(pool);
        } else {
            // Fold an undersized pool into the smallest regular bin.
            let smallest = bins
                .iter_mut()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty");
            smallest.0 += pool.0;
            smallest.1 += pool.1;
        }
    }
    let statistic: f64 = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
    };
    ChiSquare {
        statistic,
        dof,
        p_value,
        bins: bins.len(),
        note,
    }
}
