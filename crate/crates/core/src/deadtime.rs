//! Photocounting with a non-paralysable dead time inside an isolated
//! measurement window.
//!
//! Time is measured in units of the window length, so the window is `[0, 1]`
//! and the dead time is the ratio `r = τd/τm`. The mode's intensity `I(t)`
//! integrates to the efficiency `η` over the window.
//!
//! For `k ≥ 1` counts the Fock diagonal of the POVM is
//!
//! ```text
//! P(k|m) = m!/(m−k)! ∫ dt_1…dt_k  ∏ I(t_i) · (1 − Ξ_k(t))^{m−k}
//! ```
//!
//! over ordered times with gaps of at least `r`. Telescoping the
//! no-detection integrals gives `1 − Ξ_k = (1 − η) + Σ_i D(t_i)`, where
//! `D(t) = Φ(min(t + r, 1)) − Φ(t)` is the intensity swallowed by the dead
//! interval after a pulse at `t`. Writing `(c + Σ D_i)^p` as
//! `p! [z^p] e^{zc} ∏ e^{z D_i}` turns the integrand into a product of
//! one-pulse factors, so the `k`-fold integral becomes a chain of `k`
//! one-dimensional cumulative integrals over truncated power series in `z`.
//! Those are evaluated on Gauss–Legendre panels aligned with every point
//! where the integrand has a kink.

use crate::combinatorics::factorial;
use crate::error::{Error, Result};
use crate::quadrature::{PanelRule, QuadratureSpec};

/// Time profile of the detected mode inside the window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IntensityProfile {
    /// Constant intensity `η`.
    Flat { eta: f64 },
    /// `I(t) = ηγ e^{−γt} / (1 − e^{−γ})`.
    ExpDecay { eta: f64, gamma: f64 },
}

impl IntensityProfile {
    pub fn eta(&self) -> f64 {
        match *self {
            Self::Flat { eta } | Self::ExpDecay { eta, .. } => eta,
        }
    }

    pub fn intensity(&self, t: f64) -> f64 {
        match *self {
            Self::Flat { eta } => eta,
            Self::ExpDecay { eta, gamma } => eta * gamma * (-gamma * t).exp() / -(-gamma).exp_m1(),
        }
    }

    /// `Φ(t) = ∫_0^t I`.
    pub fn cumulative(&self, t: f64) -> f64 {
        match *self {
            Self::Flat { eta } => eta * t,
            Self::ExpDecay { eta, gamma } => eta * (-gamma * t).exp_m1() / (-gamma).exp_m1(),
        }
    }

    /// Intensity lost to the dead interval that follows a pulse at `t`.
    pub fn dead_mass(&self, t: f64, ratio: f64) -> f64 {
        self.cumulative((t + ratio).min(1.0)) - self.cumulative(t)
    }

    /// Draws an arrival time from the normalised profile `I(t)/η` given a
    /// uniform variate `u ∈ [0, 1)`.
    pub fn arrival_time(&self, u: f64) -> f64 {
        match *self {
            Self::Flat { .. } => u,
            Self::ExpDecay { gamma, .. } => {
                // Invert (1 − e^{−γt}) / (1 − e^{−γ}) = u.
                (-(u * (-gamma).exp_m1()).ln_1p() / gamma).clamp(0.0, 1.0)
            }
        }
    }
}

/// Number of whole dead intervals inside the window, `⌊1/r⌋`; `None` for `r = 0`.
pub fn whole_windows(ratio: f64) -> Option<usize> {
    if ratio <= 0.0 {
        return None;
    }
    // Guard values such as r = 1/3 whose reciprocal rounds just below an integer.
    Some(((1.0 / ratio) * (1.0 + 1e-12)).floor() as usize)
}

/// Adjusting efficiency `η_k = 1 − k r`, clamped at zero.
pub fn adjusting_efficiency(ratio: f64, k: usize) -> f64 {
    (1.0 - k as f64 * ratio).max(0.0)
}

/// `sinh(a) / sinh(b)` for `a ≥ 0`, `b > 0`, without overflow.
pub(crate) fn sinh_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    (a - b).exp() * (-2.0 * a).exp_m1() / (-2.0 * b).exp_m1()
}

/// Closed-form `P(k|k)` for the exponential-decay mode:
/// `[η sinh(γ η_{k−1}/2) / sinh(γ/2)]^k`, with `P(0|0) = 1`.
pub fn pkk_deadtime_exp_analytic(ratio: f64, gamma: f64, eta: f64, k: usize) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Parameter(format!(
            "decay rate must be positive and finite, got {gamma}; use the monochromatic model for γ = 0"
        )));
    }
    check_unit("dead-time ratio", ratio)?;
    check_unit("efficiency", eta)?;
    if k == 0 {
        return Ok(1.0);
    }
    if (k - 1) as f64 * ratio > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "{k} pulses do not fit in the window at dead-time ratio {ratio}"
        )));
    }
    let adj = adjusting_efficiency(ratio, k - 1);
    Ok((eta * sinh_ratio(0.5 * gamma * adj, 0.5 * gamma)).powi(k as i32))
}

pub(crate) fn check_unit(what: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Parameter(format!("{what} {x} outside [0, 1]")));
    }
    Ok(())
}

/// Breakpoints of the panel grid: the lattices `{j h}` and `{1 − j h}` with
/// `h = r / M`. Both are closed under shifts by `r`, so every panel starting
/// at or after `r` has an exact image panel one dead time earlier.
fn panel_breaks(ratio: f64, max_panel: f64) -> Vec<f64> {
    let h = if ratio > 0.0 {
        ratio / (ratio / max_panel).ceil().max(1.0)
    } else {
        1.0 / (1.0 / max_panel).ceil()
    };
    let mut pts = vec![0.0, 1.0];
    let mut j = 1;
    loop {
        let x = j as f64 * h;
        if x >= 1.0 {
            break;
        }
        pts.push(x);
        pts.push(1.0 - x);
        j += 1;
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    pts
}

struct Panel {
    lo: f64,
    half: f64,
    /// Panel `r` earlier, or `None` when that lies before the window.
    shifted: Option<usize>,
}

/// `∫ ∏ I(t_i) e^{z D(t_i)} dt` over gap-constrained ordered times, as the
/// power series coefficients `[z^0] … [z^p]`.
fn chain_integral(profile: &IntensityProfile, ratio: f64, k: usize, p: usize, spec: &QuadratureSpec) -> Vec<f64> {
    let rule = PanelRule::new(spec.nodes);
    let q = spec.nodes;
    let breaks = panel_breaks(ratio, spec.max_panel);
    let panels: Vec<Panel> = breaks
        .windows(2)
        .map(|w| {
            let lo = w[0];
            let shifted = if ratio == 0.0 || lo + 1e-12 < ratio {
                None
            } else {
                let target = lo - ratio;
                let idx = breaks.partition_point(|&b| b < target - 1e-9);
                debug_assert!((breaks[idx] - target).abs() < 1e-9);
                Some(idx)
            };
            Panel {
                lo,
                half: 0.5 * (w[1] - w[0]),
                shifted,
            }
        })
        .collect();

    // One-pulse factor g(t) = I(t) Σ_j D(t)^j / j! z^j at every node.
    let width = p + 1;
    let node = |panel: &Panel, i: usize| panel.lo + panel.half * (rule.nodes[i] + 1.0);
    let mut g = Vec::with_capacity(panels.len() * q * width);
    for panel in &panels {
        for i in 0..q {
            let t = node(panel, i);
            let intensity = profile.intensity(t);
            let d = profile.dead_mass(t, ratio);
            let mut term = intensity;
            for j in 0..width {
                g.push(term);
                term *= d / (j + 1) as f64;
            }
        }
    }

    let at = |pi: usize, i: usize| (pi * q + i) * width;
    let mut f = g.clone();
    let mut cum = vec![0.0; f.len()];
    for _ in 1..k {
        // cum(t) = ∫_0^t f, panel by panel.
        let mut base = vec![0.0; width];
        for (pi, panel) in panels.iter().enumerate() {
            for i in 0..q {
                let dst = at(pi, i);
                for c in 0..width {
                    let mut acc = 0.0;
                    for l in 0..q {
                        acc += rule.integration[i][l] * f[at(pi, l) + c];
                    }
                    cum[dst + c] = base[c] + panel.half * acc;
                }
            }
            for c in 0..width {
                let mut acc = 0.0;
                for l in 0..q {
                    acc += rule.weights[l] * f[at(pi, l) + c];
                }
                base[c] += panel.half * acc;
            }
        }
        // f_next(t) = g(t) · cum(t − r), truncated at z^p.
        let mut next = vec![0.0; f.len()];
        for (pi, panel) in panels.iter().enumerate() {
            let src_panel = match (ratio == 0.0, panel.shifted) {
                (true, _) => pi,
                (false, Some(s)) => s,
                (false, None) => continue,
            };
            for i in 0..q {
                let gi = at(pi, i);
                let ci = at(src_panel, i);
                for a in 0..width {
                    let ga = g[gi + a];
                    for b in 0..(width - a) {
                        next[gi + a + b] += ga * cum[ci + b];
                    }
                }
            }
        }
        f = next;
    }

    let mut total = vec![0.0; width];
    for (pi, panel) in panels.iter().enumerate() {
        for l in 0..q {
            for c in 0..width {
                total[c] += panel.half * rule.weights[l] * f[at(pi, l) + c];
            }
        }
    }
    total
}

fn conditional_once(profile: &IntensityProfile, ratio: f64, k: usize, m: usize, spec: &QuadratureSpec) -> f64 {
    let p = m - k;
    let series = chain_integral(profile, ratio, k, p, spec);
    let c = 1.0 - profile.eta();
    // m! [z^p] e^{zc} · series(z)
    let mut acc = 0.0;
    let mut cpow = 1.0;
    for j in (0..=p).rev() {
        acc += series[j] * cpow / factorial(p - j);
        cpow *= c;
    }
    factorial(m) * acc
}

/// `P(k|m)` for an arbitrary intensity profile by numerical integration.
///
/// Returns the fine-rule value once it agrees with a lower-order rule within
/// `spec.tol`, and an [`Error::Accuracy`] otherwise.
pub fn pkm_profile(profile: &IntensityProfile, ratio: f64, k: usize, m: usize, spec: &QuadratureSpec) -> Result<f64> {
    check_unit("dead-time ratio", ratio)?;
    check_unit("efficiency", profile.eta())?;
    if k > m {
        return Ok(0.0);
    }
    if k == 0 {
        return Ok((1.0 - profile.eta()).powi(m as i32));
    }
    if (k - 1) as f64 * ratio > 1.0 + 1e-12 {
        return Ok(0.0);
    }
    let fine = conditional_once(profile, ratio, k, m, spec);
    let coarse = conditional_once(profile, ratio, k, m, &spec.coarse());
    let error_bound = (fine - coarse).abs();
    if !(error_bound <= spec.tol) || !fine.is_finite() {
        return Err(Error::Accuracy {
            estimate: fine,
            error_bound,
            tol: spec.tol,
        });
    }
    // Tiny negative values are quadrature noise.
    Ok(fine.max(0.0))
}
