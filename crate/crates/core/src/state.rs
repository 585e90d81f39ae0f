use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// State in the zero- plus one-excitation sector: one amplitude per qubit
/// (excitation on that qubit) and one for the all-ground state `|G⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveVector {
    pub amplitudes: Vec<C64>,
    pub vacuum: C64,
}

impl WaveVector {
    pub fn new(amplitudes: Vec<C64>, vacuum: C64) -> Self {
        Self { amplitudes, vacuum }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self {
            amplitudes: values.iter().map(|&x| C64::new(x, 0.0)).collect(),
            vacuum: C64::new(0.0, 0.0),
        }
    }

    /// Single excitation on qubit `site` (0-based).
    pub fn basis(qubits: usize, site: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); qubits];
        v[site] = C64::new(1.0, 0.0);
        Self { amplitudes: v, vacuum: C64::new(0.0, 0.0) }
    }

    /// `|G⟩`, no excitation.
    pub fn ground(qubits: usize) -> Self {
        Self { amplitudes: vec![C64::new(0.0, 0.0); qubits], vacuum: C64::new(1.0, 0.0) }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Probability of finding one excitation in the chain.
    pub fn excitation_weight(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.excitation_weight() + self.vacuum.norm_sqr()).sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        self.vacuum /= n;
        Ok(self)
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`, vacuum included.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: other.len() });
        }
        let chain: C64 = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum();
        Ok(chain + self.vacuum.conj() * other.vacuum)
    }

    pub fn check_normalized(&self, tolerance: f64) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > tolerance {
            return Err(Error::NotNormalized { norm: n, tolerance });
        }
        Ok(())
    }
}
