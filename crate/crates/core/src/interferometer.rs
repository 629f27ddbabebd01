//! Unitary mode transformations of a lossless linear interferometer.
//!
//! Entry `U[(j, i)]` is the amplitude for a photon entering input mode `i` to
//! leave through output mode `j`.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Default tolerance on `max |(U†U − I)_ij|`.
pub const UNITARITY_TOL: f64 = 1e-10;

/// A square matrix verified to be unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    /// Relabels output modes: row `j` of the result is row `perm[j]` of `self`.
    pub fn permute_outputs(&self, perm: &[usize]) -> Self {
        Self(self.0.permute_rows(perm))
    }
}

impl std::ops::Index<(usize, usize)> for UnitaryMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

/// Checks `m` for unitarity within `tol`.
pub fn validate_unitary(m: ComplexMatrix, tol: f64) -> Result<UnitaryMatrix> {
    let residual = m.unitarity_residual()?;
    // `!(<=)` also rejects a NaN residual.
    if !(residual <= tol) {
        return Err(Error::NotUnitary { residual, tol });
    }
    Ok(UnitaryMatrix(m))
}

/// Two-mode splitter `[[t, r e^{iφ}], [−r e^{−iφ}, t]]` with `r = √(1 − t²)`.
pub fn beam_splitter(transmittance_amplitude: f64, phase: f64) -> Result<UnitaryMatrix> {
    let t = transmittance_amplitude;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!(
            "transmittance amplitude {t} outside [0, 1]"
        )));
    }
    if !phase.is_finite() {
        return Err(Error::Parameter(format!("phase {phase} is not finite")));
    }
    let r = (1.0 - t * t).sqrt();
    let m = ComplexMatrix::from_rows(&[
        vec![Complex64::new(t, 0.0), Complex64::from_polar(r, phase)],
        vec![-Complex64::from_polar(r, -phase), Complex64::new(t, 0.0)],
    ])?;
    validate_unitary(m, UNITARITY_TOL)
}

/// The balanced splitter, `t = 1/√2` and zero phase.
pub fn balanced_beam_splitter() -> UnitaryMatrix {
    beam_splitter(std::f64::consts::FRAC_1_SQRT_2, 0.0).expect("balanced splitter is unitary")
}

/// Discrete Fourier network `(1/√n) exp(2πi jk/n)`.
pub fn dft_unitary(n: usize) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::Parameter("DFT dimension must be at least 1".into()));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let m = ComplexMatrix::from_fn(n, n, |j, k| {
        // Reduce the exponent first so large products keep their precision.
        let e = (j * k) % n;
        Complex64::from_polar(norm, 2.0 * PI * e as f64 / n as f64)
    });
    validate_unitary(m, UNITARITY_TOL)
}

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre
/// matrix, normalised so that `R` has a positive real diagonal.
///
/// Gram–Schmidt on the Gaussian columns yields exactly that `Q`; a second
/// orthogonalisation pass keeps the residual near machine precision.
/// Output is bitwise reproducible for equal `(n, seed)`.
pub fn haar_random_unitary(n: usize, seed: u64) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::Parameter("Haar dimension must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re * scale, im * scale)
                })
                .collect()
        })
        .collect();

    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let proj: Complex64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(q, a)| q.conj() * a)
                    .sum();
                let (done, rest) = cols.split_at_mut(j);
                for (a, q) in rest[0].iter_mut().zip(&done[i]) {
                    *a -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Domain("degenerate Gaussian sample".into()));
        }
        for z in &mut cols[j] {
            *z /= norm;
        }
    }

    let m = ComplexMatrix::from_fn(n, n, |r, c| cols[c][r]);
    validate_unitary(m, UNITARITY_TOL)
}

/// On-disk JSON layout: `{"dim": N, "entries": [[[re, im], …], …]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.rows(),
            entries: m
                .to_rows()
                .into_iter()
                .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    /// Converts to a matrix, rejecting non-finite entries and shape mismatches.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.entries.len() != self.dim || self.entries.iter().any(|r| r.len() != self.dim) {
            return Err(Error::Format(format!(
                "entries do not form a {0}x{0} matrix",
                self.dim
            )));
        }
        let mut rows = Vec::with_capacity(self.dim);
        for (r, row) in self.entries.iter().enumerate() {
            let mut out = Vec::with_capacity(self.dim);
            for (c, &[re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::Format(format!("non-finite entry at ({r}, {c})")));
                }
                out.push(Complex64::new(re, im));
            }
            rows.push(out);
        }
        ComplexMatrix::from_rows(&rows)
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixFile::from_matrix(m)).expect("matrix serializes")
}

/// Parses a matrix file without checking unitarity.
pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.to_matrix()
}

/// Reads a matrix file and validates it as unitary within `tol`.
pub fn load_unitary(path: &Path, tol: f64) -> Result<UnitaryMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    validate_unitary(matrix_from_json(&text)?, tol)
}
