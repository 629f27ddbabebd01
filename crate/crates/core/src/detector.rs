//! Conditional count probabilities `P(k|m) = ⟨m|Π_k|m⟩` for realistic
//! photon-number-resolving detectors.
//!
//! None of the models produce dark counts, so `P(k|m) = 0` whenever `k > m`.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_cdf, binomial_pmf, stirling2_table};
use crate::deadtime::{
    adjusting_efficiency, check_unit, pkk_deadtime_exp_analytic, pkm_profile, whole_windows,
    IntensityProfile,
};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DetectorModel {
    /// Perfect photon-number resolution.
    #[serde(rename = "ideal")]
    IdealPnr,
    /// Photon-number resolution with efficiency `eta`.
    #[serde(rename = "lossy")]
    LossyPnr { eta: f64 },
    /// `k` on/off detectors sharing the mode equally; the outcome is the
    /// number that click.
    #[serde(rename = "array")]
    OnOffArray {
        #[serde(rename = "K")]
        k: usize,
        eta: f64,
    },
    /// Pulse counting with dead-time ratio `ratio = τd/τm` and a flat mode.
    #[serde(rename = "deadtime-mono")]
    DeadTimeMono { ratio: f64, eta: f64 },
    /// Pulse counting with an exponentially decaying mode of rate `gamma`.
    #[serde(rename = "deadtime-exp")]
    DeadTimeExp { ratio: f64, gamma: f64, eta: f64 },
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::IdealPnr => Ok(()),
            Self::LossyPnr { eta } => check_unit("efficiency", eta),
            Self::OnOffArray { k, eta } => {
                if k == 0 {
                    return Err(Error::Parameter("array needs at least one detector".into()));
                }
                check_unit("efficiency", eta)
            }
            Self::DeadTimeMono { ratio, eta } => {
                check_unit("dead-time ratio", ratio)?;
                check_unit("efficiency", eta)
            }
            Self::DeadTimeExp { ratio, gamma, eta } => {
                check_unit("dead-time ratio", ratio)?;
                check_unit("efficiency", eta)?;
                if !(gamma > 0.0) || !gamma.is_finite() {
                    return Err(Error::Parameter(format!(
                        "decay rate must be positive and finite, got {gamma}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn eta(&self) -> f64 {
        match *self {
            Self::IdealPnr => 1.0,
            Self::LossyPnr { eta }
            | Self::OnOffArray { eta, .. }
            | Self::DeadTimeMono { eta, .. }
            | Self::DeadTimeExp { eta, .. } => eta,
        }
    }

    /// Hard upper bound on the count, or `None` when the detector can report
    /// any number.
    pub fn count_limit(&self) -> Option<usize> {
        match *self {
            Self::IdealPnr | Self::LossyPnr { .. } => None,
            Self::OnOffArray { k, .. } => Some(k),
            Self::DeadTimeMono { ratio, .. } | Self::DeadTimeExp { ratio, .. } => {
                whole_windows(ratio).map(|w| w + 1)
            }
        }
    }

    /// Largest count the detector can report given `m` photons' worth of
    /// outcome space: `m` for number-resolving models, `K` for arrays and
    /// `⌊τm/τd⌋ + 1` with dead time.
    pub fn max_counts(&self, m: usize) -> usize {
        self.count_limit().unwrap_or(m)
    }

    fn check_count(&self, k: usize) -> Result<()> {
        match self.count_limit() {
            Some(limit) if k > limit => Err(Error::Domain(format!(
                "{k} counts exceed the range 0..={limit} of {self}"
            ))),
            _ => Ok(()),
        }
    }

    /// `P(k|m)`. The exponential-decay model integrates numerically off the
    /// diagonal with the default [`QuadratureSpec`].
    pub fn cond_prob(&self, k: usize, m: usize) -> Result<f64> {
        self.cond_prob_with(k, m, &QuadratureSpec::default())
    }

    pub fn cond_prob_with(&self, k: usize, m: usize, quad: &QuadratureSpec) -> Result<f64> {
        self.validate()?;
        self.check_count(k)?;
        match *self {
            Self::IdealPnr => Ok(if k == m { 1.0 } else { 0.0 }),
            Self::LossyPnr { eta } => Ok(pkm_lossy(eta, k, m)),
            Self::OnOffArray { k: bins, eta } => pkm_array(bins, eta, k, m),
            Self::DeadTimeMono { ratio, eta } => pkm_deadtime_mono(ratio, eta, k, m),
            Self::DeadTimeExp { ratio, gamma, eta } => {
                if k == m {
                    pkk_deadtime_exp_analytic(ratio, gamma, eta, k)
                } else {
                    pkm_deadtime_exp(ratio, gamma, eta, k, m, quad)
                }
            }
        }
    }

    /// `P(k|k)` from the model's closed form.
    pub fn diagonal(&self, k: usize) -> Result<f64> {
        self.validate()?;
        self.check_count(k)?;
        match *self {
            Self::IdealPnr => Ok(1.0),
            Self::LossyPnr { eta } => Ok(eta.powi(k as i32)),
            Self::OnOffArray { k: bins, eta } => {
                // (η/K)^k K!/(K−k)!
                Ok((0..k).map(|i| eta * (bins - i) as f64 / bins as f64).product())
            }
            Self::DeadTimeMono { ratio, eta } => {
                if k == 0 {
                    return Ok(1.0);
                }
                Ok((eta * adjusting_efficiency(ratio, k - 1)).powi(k as i32))
            }
            Self::DeadTimeExp { ratio, gamma, eta } => pkk_deadtime_exp_analytic(ratio, gamma, eta, k),
        }
    }
}

impl std::fmt::Display for DetectorModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Self::IdealPnr => write!(f, "ideal"),
            Self::LossyPnr { eta } => write!(f, "lossy(eta={eta})"),
            Self::OnOffArray { k, eta } => write!(f, "array(K={k}, eta={eta})"),
            Self::DeadTimeMono { ratio, eta } => write!(f, "deadtime-mono(ratio={ratio}, eta={eta})"),
            Self::DeadTimeExp { ratio, gamma, eta } => {
                write!(f, "deadtime-exp(ratio={ratio}, gamma={gamma}, eta={eta})")
            }
        }
    }
}

/// Binomial thinning: `C(m,k) η^k (1−η)^{m−k}`.
pub fn pkm_lossy(eta: f64, k: usize, m: usize) -> f64 {
    binomial_pmf(m, k, eta)
}

/// Array of `bins` on/off detectors.
///
/// Evaluated as thinning followed by uniform occupancy,
/// `Σ_l B(m,l;η) · K!/(K−k)! · S(l,k) / K^l`, which has only positive terms.
/// It agrees with the alternating expansion of the normally ordered POVM,
/// `C(K,k) Σ_j (−1)^j C(k,j) (1 − η(K−k+j)/K)^m`.
pub fn pkm_array(bins: usize, eta: f64, k: usize, m: usize) -> Result<f64> {
    if bins == 0 {
        return Err(Error::Parameter("array needs at least one detector".into()));
    }
    check_unit("efficiency", eta)?;
    if k > bins {
        return Err(Error::Domain(format!("{k} clicks exceed an array of {bins}")));
    }
    if k > m {
        return Ok(0.0);
    }
    let kf = bins as f64;
    let falling: f64 = (0..k).map(|i| (bins - i) as f64 / kf).product();
    let stirling = stirling2_table(m);
    let mut acc = 0.0;
    for (l, row) in stirling.iter().enumerate().skip(k) {
        let occupancy = falling * row[k] * kf.powi(-((l - k) as i32));
        acc += binomial_pmf(m, l, eta) * occupancy;
    }
    Ok(acc)
}

/// Monochromatic pulse counting with dead-time ratio `r`:
///
/// * `k = 0`: `(1−η)^m`
/// * `1 ≤ k ≤ K`: `Σ_{l≤k} B(m,l;ηη_k) − Σ_{l≤k−1} B(m,l;ηη_{k−1})`
/// * `k = K+1`: `1 − Σ_{l≤K} B(m,l;ηη_K)`
///
/// with `K = ⌊1/r⌋`. At `r = 0` this is plain binomial thinning.
pub fn pkm_deadtime_mono(ratio: f64, eta: f64, k: usize, m: usize) -> Result<f64> {
    check_unit("dead-time ratio", ratio)?;
    check_unit("efficiency", eta)?;
    let Some(windows) = whole_windows(ratio) else {
        return Ok(pkm_lossy(eta, k, m));
    };
    if k > windows + 1 {
        return Err(Error::Domain(format!(
            "{k} pulses exceed the range 0..={} at dead-time ratio {ratio}",
            windows + 1
        )));
    }
    if k > m {
        return Ok(0.0);
    }
    if k == 0 {
        return Ok((1.0 - eta).powi(m as i32));
    }
    let mu = |j: usize| eta * adjusting_efficiency(ratio, j);
    let value = if k <= windows {
        binomial_cdf(m, k, mu(k)) - binomial_cdf(m, k - 1, mu(k - 1))
    } else {
        1.0 - binomial_cdf(m, windows, mu(windows))
    };
    Ok(value.max(0.0))
}

/// Exponential-decay mode with dead time, by numerical integration.
pub fn pkm_deadtime_exp(
    ratio: f64,
    gamma: f64,
    eta: f64,
    k: usize,
    m: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!("decay rate must be positive, got {gamma}")));
    }
    check_unit("dead-time ratio", ratio)?;
    check_unit("efficiency", eta)?;
    if let Some(w) = whole_windows(ratio) {
        if k > w + 1 {
            return Err(Error::Domain(format!(
                "{k} pulses exceed the range 0..={} at dead-time ratio {ratio}",
                w + 1
            )));
        }
    }
    pkm_profile(&IntensityProfile::ExpDecay { eta, gamma }, ratio, k, m, quad)
}

/// `P(k|m)` for `k = 0…max_counts`, `m = 0…max_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondProbTable {
    pub model: DetectorModel,
    pub max_m: usize,
    pub max_counts: usize,
    /// `values[k][m]`.
    pub values: Vec<Vec<f64>>,
}

impl CondProbTable {
    pub fn build(model: DetectorModel, max_m: usize) -> Result<Self> {
        Self::build_with(model, max_m, &QuadratureSpec::default())
    }

    pub fn build_with(model: DetectorModel, max_m: usize, quad: &QuadratureSpec) -> Result<Self> {
        model.validate()?;
        let max_counts = model.max_counts(max_m);
        let mut values = vec![vec![0.0; max_m + 1]; max_counts + 1];
        for m in 0..=max_m {
            for (k, row) in values.iter_mut().enumerate().take(max_counts.min(m) + 1) {
                row[m] = model.cond_prob_with(k, m, quad)?;
            }
        }
        Ok(Self {
            model,
            max_m,
            max_counts,
            values,
        })
    }

    /// `P(k|m)`, zero outside the table.
    pub fn get(&self, k: usize, m: usize) -> f64 {
        self.values
            .get(k)
            .and_then(|row| row.get(m))
            .copied()
            .unwrap_or(0.0)
    }

    /// The column `P(·|m)` up to the last count that can occur.
    pub fn column(&self, m: usize) -> Vec<f64> {
        (0..=self.max_counts.min(m)).map(|k| self.get(k, m)).collect()
    }

    /// `Σ_k P(k|m)`.
    pub fn completeness(&self, m: usize) -> f64 {
        self.column(m).iter().sum()
    }

    /// CSV with header `k,m,p`, one row per entry ordered by `m` then `k`.
    pub fn to_csv(&self, fmt_value: impl Fn(f64) -> String) -> String {
        let mut out = String::from("k,m,p\n");
        for m in 0..=self.max_m {
            for k in 0..=self.max_counts {
                out.push_str(&format!("{k},{m},{}\n", fmt_value(self.get(k, m))));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}
