//! Output photon-number statistics for Fock-state inputs and ideal
//! photon-number-resolving detectors.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::combinatorics::factorial;
use crate::distribution::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::interferometer::UnitaryMatrix;
use crate::limits::size_cap;
use crate::pattern::{enumerate_outcomes, Pattern};
use crate::permanent::{expanded_submatrix, permanent_with_cap};

/// Largest photon number accepted by [`fock_oracle_distribution`].
pub const ORACLE_MAX_PHOTONS: usize = 7;

fn check_lengths(u: &UnitaryMatrix, p: &Pattern, what: &str) -> Result<()> {
    if p.modes() != u.dim() {
        return Err(Error::Shape(format!(
            "{what} pattern has {} modes, interferometer has {}",
            p.modes(),
            u.dim()
        )));
    }
    Ok(())
}

fn factorial_product(p: &Pattern) -> f64 {
    p.counts().iter().map(|&c| factorial(c)).product()
}

/// `|Perm U[output|input]|² / (∏ m_i! ∏ n_j!)`, and exactly zero when the
/// totals differ.
pub fn ideal_probability(u: &UnitaryMatrix, input: &Pattern, output: &Pattern) -> Result<f64> {
    ideal_probability_with_cap(u, input, output, size_cap())
}

pub fn ideal_probability_with_cap(
    u: &UnitaryMatrix,
    input: &Pattern,
    output: &Pattern,
    cap: usize,
) -> Result<f64> {
    check_lengths(u, input, "input")?;
    check_lengths(u, output, "output")?;
    let n = input.total();
    if n > cap {
        return Err(Error::SizeCap { size: n, cap });
    }
    if output.total() != n {
        return Ok(0.0);
    }
    let sub = expanded_submatrix(u.matrix(), output.counts(), input.counts())?;
    let perm = permanent_with_cap(&sub, cap)?;
    Ok(perm.norm_sqr() / (factorial_product(output) * factorial_product(input)))
}

/// The full output distribution over all patterns with the input's total.
///
/// Outcomes are evaluated in parallel; the result does not depend on the
/// evaluation order.
pub fn ideal_distribution(u: &UnitaryMatrix, input: &Pattern) -> Result<OutcomeDistribution> {
    check_lengths(u, input, "input")?;
    let cap = size_cap();
    let n = input.total();
    if n > cap {
        return Err(Error::SizeCap { size: n, cap });
    }
    let outcomes = enumerate_outcomes(n, u.dim(), n);
    let probs: Vec<f64> = outcomes
        .par_iter()
        .map(|out| ideal_probability_with_cap(u, input, out, cap))
        .collect::<Result<_>>()?;
    Ok(OutcomeDistribution::new(
        input.clone(),
        outcomes.into_iter().zip(probs).collect(),
    ))
}

/// Output distribution by direct expansion of `∏_i (Σ_j U_ji a†_j)^{n_i} |0⟩`,
/// without computing any permanent.
///
/// Each monomial `∏ a†_j^{m_j}` becomes `√(∏ m_j!) |m⟩`, and the input state
/// carries the normalisation `1/√(∏ n_i!)`.
pub fn fock_oracle_distribution(u: &UnitaryMatrix, input: &Pattern) -> Result<OutcomeDistribution> {
    check_lengths(u, input, "input")?;
    let n = input.total();
    if n > ORACLE_MAX_PHOTONS {
        return Err(Error::SizeCap {
            size: n,
            cap: ORACLE_MAX_PHOTONS,
        });
    }
    let modes = u.dim();
    let mut poly: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
    poly.insert(vec![0; modes], Complex64::new(1.0, 0.0));

    for (i, &photons) in input.counts().iter().enumerate() {
        for _ in 0..photons {
            let mut next: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
            for (mono, coef) in &poly {
                for j in 0..modes {
                    let mut m = mono.clone();
                    m[j] += 1;
                    *next.entry(m).or_insert(Complex64::new(0.0, 0.0)) += coef * u[(j, i)];
                }
            }
            poly = next;
        }
    }

    let norm_in = factorial_product(input);
    let mut entries: BTreeMap<Pattern, f64> = enumerate_outcomes(n, modes, n)
        .into_iter()
        .map(|p| (p, 0.0))
        .collect();
    for (mono, coef) in poly {
        let out = Pattern::new(mono);
        let p = coef.norm_sqr() * factorial_product(&out) / norm_in;
        entries.insert(out, p);
    }
    Ok(OutcomeDistribution::new(input.clone(), entries))
}
