//! Gauss–Legendre rules and ordered-simplex integration.

use serde::{Deserialize, Serialize};

/// Accuracy settings for the dead-time integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per panel.
    pub nodes: usize,
    /// Upper bound on panel width, in units of the measurement window.
    pub max_panel: f64,
    /// Absolute tolerance on the returned value.
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 16,
            max_panel: 0.05,
            tol: 1e-6,
        }
    }
}

impl QuadratureSpec {
    /// The lower-order companion rule used for the error estimate.
    pub fn coarse(&self) -> Self {
        Self {
            nodes: (self.nodes * 2 / 3).max(2),
            ..*self
        }
    }
}

/// Legendre polynomials `P_0(x) … P_n(x)`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for l in 2..=n {
        let v = ((2 * l - 1) as f64 * x * p[l - 1] - (l - 1) as f64 * p[l - 2]) / l as f64;
        p.push(v);
    }
    p
}

/// Nodes and weights of the `q`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let p = legendre_values(q, x);
            let (pq, pq1) = (p[q], p[q - 1]);
            let dp = q as f64 * (x * pq - pq1) / (x * x - 1.0);
            let dx = pq / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let p = legendre_values(q, x);
        let dp = q as f64 * (x * p[q] - p[q - 1]) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    (nodes, weights)
}

/// A Gauss–Legendre rule together with its spectral integration matrix:
/// `Σ_l W[i][l] f(x_l)` approximates `∫_{-1}^{x_i} f`.
#[derive(Clone, Debug)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub integration: Vec<Vec<f64>>,
}

impl PanelRule {
    pub fn new(q: usize) -> Self {
        let (nodes, weights) = gauss_legendre(q);
        // Expand in Legendre polynomials, then integrate term by term:
        // ∫_{-1}^x P_0 = x + 1, ∫_{-1}^x P_n = (P_{n+1} − P_{n−1}) / (2n + 1).
        let p_at_nodes: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_values(q, x)).collect();
        let integrals: Vec<Vec<f64>> = nodes
            .iter()
            .zip(&p_at_nodes)
            .map(|(&x, p)| {
                (0..q)
                    .map(|n| {
                        if n == 0 {
                            x + 1.0
                        } else {
                            (p[n + 1] - p[n - 1]) / (2 * n + 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        let integration = (0..q)
            .map(|i| {
                (0..q)
                    .map(|l| {
                        (0..q)
                            .map(|n| {
                                0.5 * (2 * n + 1) as f64
                                    * weights[l]
                                    * p_at_nodes[l][n]
                                    * integrals[i][n]
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Self {
            nodes,
            weights,
            integration,
        }
    }
}

/// Integrates `f` over the ordered simplex `0 ≤ s_1 ≤ … ≤ s_k ≤ length` with
/// an iterated `q`-point Gauss–Legendre rule. Cost grows as `q^k`.
///
/// `split` optionally names a point in `(0, length)` where the integrand is
/// not smooth in its last coordinate. Every level is split there, since the
/// inner integrals inherit the kink as their lower limit crosses it.
pub fn ordered_simplex_gauss(
    k: usize,
    length: f64,
    q: usize,
    split: Option<f64>,
    f: &dyn Fn(&[f64]) -> f64,
) -> f64 {
    fn rec(
        depth: usize,
        lo: f64,
        length: f64,
        split: Option<f64>,
        rule: &(Vec<f64>, Vec<f64>),
        point: &mut Vec<f64>,
        f: &dyn Fn(&[f64]) -> f64,
    ) -> f64 {
        if depth == 0 {
            return f(point);
        }
        let pieces = match split {
            Some(s) if s > lo && s < length => vec![(lo, s), (s, length)],
            _ => vec![(lo, length)],
        };
        let mut acc = 0.0;
        for (a, b) in pieces {
            let half = 0.5 * (b - a);
            for (&x, &w) in rule.0.iter().zip(&rule.1) {
                let s = a + half * (x + 1.0);
                point.push(s);
                acc += w * half * rec(depth - 1, s, length, split, rule, point, f);
                point.pop();
            }
        }
        acc
    }
    if k == 0 {
        return f(&[]);
    }
    if length <= 0.0 {
        return 0.0;
    }
    let rule = gauss_legendre(q);
    rec(k, 0.0, length, split, &rule, &mut Vec::with_capacity(k), f)
}
