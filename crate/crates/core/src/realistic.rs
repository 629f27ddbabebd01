//! Output statistics seen through realistic detectors.
//!
//! The full count distribution is the convolution
//! `ρ_k = Σ_m ∏_i P(k_i|m_i) · P_m` over ideal outcomes `m`. On the
//! postselected sector `Σ k_i = n` only `m = k` contributes, so
//! `ρ_k = C_k · P_k` with `C_k = ∏_i P(k_i|k_i)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::partitions;
use crate::detector::{CondProbTable, DetectorModel};
use crate::distribution::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::ideal::{ideal_distribution, ideal_probability};
use crate::interferometer::UnitaryMatrix;
use crate::pattern::{enumerate_outcomes, Pattern};
use crate::quadrature::QuadratureSpec;

/// The multiset of counts `≥ 2` in a pattern, sorted descending. Patterns
/// with the same identifier and total share a correction coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct ReducedIdentifier(Vec<usize>);

impl ReducedIdentifier {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = parts.iter().find(|&&p| p < 2) {
            return Err(Error::Parameter(format!(
                "identifier parts must be at least 2, got {bad}"
            )));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self(parts))
    }

    pub fn of(pattern: &Pattern) -> Self {
        let mut parts: Vec<usize> = pattern.counts().iter().copied().filter(|&c| c >= 2).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Photons in bunched modes.
    pub fn bunched(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_collision_free(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiset inclusion.
    pub fn contains(&self, other: &Self) -> bool {
        let mut mine = self.0.clone();
        for p in &other.0 {
            match mine.iter().position(|q| q == p) {
                Some(i) => {
                    mine.swap_remove(i);
                }
                None => return false,
            }
        }
        true
    }

    /// All identifiers with at most `n` bunched photons, ordered by bunched
    /// photon count, then by number of parts (more first), then
    /// lexicographically with larger parts first.
    pub fn all_up_to(n: usize) -> Vec<Self> {
        let mut ids: Vec<Self> = (0..=n)
            .flat_map(|j| partitions(j, 2))
            .map(|p| Self::new(p).expect("parts are at least 2"))
            .collect();
        ids.sort_by(|a, b| {
            a.bunched()
                .cmp(&b.bunched())
                .then(b.0.len().cmp(&a.0.len()))
                .then(b.0.cmp(&a.0))
        });
        ids
    }
}

impl From<ReducedIdentifier> for Vec<usize> {
    fn from(id: ReducedIdentifier) -> Self {
        id.0
    }
}

impl TryFrom<Vec<usize>> for ReducedIdentifier {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Self::new(parts)
    }
}

impl fmt::Display for ReducedIdentifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for ReducedIdentifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| Error::Format(format!("identifier {s:?} is not of the form {{a,b,…}}")))?;
        if inner.trim().is_empty() {
            return Ok(Self::default());
        }
        let parts = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Format(format!("identifier {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

pub fn reduced_identifier(pattern: &Pattern) -> ReducedIdentifier {
    ReducedIdentifier::of(pattern)
}

/// `C_k = ∏_i P(k_i|k_i)`, evaluated in the canonical order of the
/// pattern's reduced identifier so that equivalent patterns agree exactly.
pub fn correction_coefficient(model: &DetectorModel, pattern: &Pattern) -> Result<f64> {
    model.validate()?;
    if let (Some(limit), max) = (model.count_limit(), pattern.max_count()) {
        if max > limit {
            return Err(Error::Domain(format!(
                "{max} counts in one mode exceed the range 0..={limit} of {model}"
            )));
        }
    }
    identifier_coefficient(model, &ReducedIdentifier::of(pattern), pattern.total())
}

/// The coefficient shared by every pattern of total `n` with identifier `id`:
/// `η^{n − Σ parts} ∏_parts P(k|k)`, since unit counts contribute `P(1|1) = η`.
pub fn identifier_coefficient(model: &DetectorModel, id: &ReducedIdentifier, n: usize) -> Result<f64> {
    if id.bunched() > n {
        return Err(Error::Domain(format!("identifier {id} needs more than {n} photons")));
    }
    let singles = model.diagonal(1)?.powi((n - id.bunched()) as i32);
    id.parts()
        .iter()
        .try_fold(singles, |acc, &k| Ok(acc * model.diagonal(k)?))
}

/// Whether every part of `id` is a count the detector can report.
pub fn identifier_in_range(model: &DetectorModel, id: &ReducedIdentifier) -> bool {
    match model.count_limit() {
        Some(limit) => id.parts().iter().all(|&k| k <= limit),
        None => true,
    }
}

fn check_input(u: &UnitaryMatrix, input: &Pattern) -> Result<()> {
    if input.modes() != u.dim() {
        return Err(Error::Shape(format!(
            "input pattern has {} modes, interferometer has {}",
            input.modes(),
            u.dim()
        )));
    }
    Ok(())
}

/// Count distribution over every pattern `k` with `k_i ≤ max_counts` and
/// `Σ k_i ≤ n`, by direct convolution of the ideal distribution with the
/// detector's conditional probabilities.
pub fn realistic_distribution(
    u: &UnitaryMatrix,
    input: &Pattern,
    model: &DetectorModel,
) -> Result<OutcomeDistribution> {
    realistic_distribution_with(u, input, model, &QuadratureSpec::default())
}

pub fn realistic_distribution_with(
    u: &UnitaryMatrix,
    input: &Pattern,
    model: &DetectorModel,
    quad: &QuadratureSpec,
) -> Result<OutcomeDistribution> {
    model.validate()?;
    let ideal = ideal_distribution(u, input)?;
    convolve(&ideal, model, quad)
}

/// Applies the detector response to an ideal output distribution whose
/// outcomes all carry the same photon number.
pub fn convolve(
    ideal: &OutcomeDistribution,
    model: &DetectorModel,
    quad: &QuadratureSpec,
) -> Result<OutcomeDistribution> {
    let n = ideal.n();
    let modes = ideal.input().modes();
    let table = CondProbTable::build_with(*model, n, quad)?;
    let cap = table.max_counts.min(n);

    let mut entries: BTreeMap<Pattern, f64> = (0..=n)
        .flat_map(|j| enumerate_outcomes(j, modes, cap))
        .map(|p| (p, 0.0))
        .collect();

    let sources: Vec<(&Pattern, f64)> = ideal.iter().filter(|(_, p)| *p != 0.0).collect();
    let contributions: Vec<Vec<(Vec<usize>, f64)>> = sources
        .par_iter()
        .map(|(m, p)| spread(m.counts(), *p, &table))
        .collect();
    // Merged in ideal-outcome order so the sums are reproducible bit for bit.
    for part in contributions {
        for (k, w) in part {
            *entries.get_mut(&Pattern::new(k)).expect("count pattern within support") += w;
        }
    }
    Ok(OutcomeDistribution::new(ideal.input().clone(), entries))
}

fn spread(m: &[usize], weight: f64, table: &CondProbTable) -> Vec<(Vec<usize>, f64)> {
    let columns: Vec<Vec<(usize, f64)>> = m
        .iter()
        .map(|&mi| {
            table
                .column(mi)
                .into_iter()
                .enumerate()
                .filter(|&(_, p)| p != 0.0)
                .collect()
        })
        .collect();
    let mut out = vec![(Vec::with_capacity(m.len()), weight)];
    for col in &columns {
        let mut next = Vec::with_capacity(out.len() * col.len());
        for (k, w) in &out {
            for &(ki, p) in col {
                let mut k = k.clone();
                k.push(ki);
                next.push((k, w * p));
            }
        }
        out = next;
    }
    out
}

/// `ρ_k = C_k · P_k` for a pattern with the input's photon number.
pub fn postselected_probability(
    u: &UnitaryMatrix,
    input: &Pattern,
    model: &DetectorModel,
    k: &Pattern,
) -> Result<f64> {
    check_input(u, input)?;
    if k.total() != input.total() {
        return Err(Error::Domain(format!(
            "pattern {k} has {} counts but {} photons were injected; the product form holds only on the postselected sector",
            k.total(),
            input.total()
        )));
    }
    let c = correction_coefficient(model, k)?;
    Ok(c * ideal_probability(u, input, k)?)
}

/// Probability that the detectors report exactly as many counts as photons
/// were injected.
pub fn postselection_efficiency(u: &UnitaryMatrix, input: &Pattern, model: &DetectorModel) -> Result<f64> {
    model.validate()?;
    check_input(u, input)?;
    let n = input.total();
    let cap = model.max_counts(n).min(n);
    let ideal = ideal_distribution(u, input)?;
    let mut acc = 0.0;
    for (k, p) in ideal.iter() {
        if k.max_count() <= cap {
            acc += correction_coefficient(model, k)? * p;
        }
    }
    Ok(acc)
}

/// Correction coefficients for every reduced identifier with at most `n`
/// bunched photons that the detector can register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTable {
    pub model: DetectorModel,
    pub n: usize,
    pub entries: Vec<CorrectionEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionEntry {
    pub identifier: ReducedIdentifier,
    pub coefficient: f64,
}

impl CorrectionTable {
    pub fn get(&self, id: &ReducedIdentifier) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| &e.identifier == id)
            .map(|e| e.coefficient)
    }
}

pub fn correction_table(model: &DetectorModel, n: usize) -> Result<CorrectionTable> {
    model.validate()?;
    let entries = ReducedIdentifier::all_up_to(n)
        .into_iter()
        .filter(|id| identifier_in_range(model, id))
        .map(|id| {
            let coefficient = identifier_coefficient(model, &id, n)?;
            Ok(CorrectionEntry {
                identifier: id,
                coefficient,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CorrectionTable {
        model: *model,
        n,
        entries,
    })
}

/// The swept parameter of a model: `K` for arrays, `τd/τm` for dead-time
/// models and `η` otherwise.
pub fn sweep_parameter(model: &DetectorModel) -> f64 {
    match *model {
        DetectorModel::OnOffArray { k, .. } => k as f64,
        DetectorModel::DeadTimeMono { ratio, .. } | DetectorModel::DeadTimeExp { ratio, .. } => ratio,
        other => other.eta(),
    }
}

/// One table per model.
pub fn correction_sweep(models: &[DetectorModel], n: usize) -> Result<Vec<CorrectionTable>> {
    models.par_iter().map(|m| correction_table(m, n)).collect()
}

/// CSV with header `identifier,K_or_r,coefficient`, one row per identifier
/// and sweep point.
pub fn correction_csv(tables: &[CorrectionTable], fmt_value: impl Fn(f64) -> String) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["identifier", "K_or_r", "coefficient"])
        .expect("in-memory write");
    for t in tables {
        let x = fmt_value(sweep_parameter(&t.model));
        for e in &t.entries {
            w.write_record([e.identifier.to_string(), x.clone(), fmt_value(e.coefficient)])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}
