//! Chain geometry, coupling profiles, ramp schedules and quenched disorder.
//!
//! Units throughout: ħ = 1 and energies are measured in `g1`, so a chain built
//! with `g1 = 1` has times in units of `1/g1`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static description of a qubit chain with cosine-modulated couplings
/// `J_x = g0 + g1 cos(2πx/p + θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Qubits per unit cell.
    pub period: usize,
    /// Total number of qubits `M`; bonds are indexed `x = 1..M-1`.
    pub qubits: usize,
    pub g0: f64,
    pub g1: f64,
}

impl ChainSpec {
    pub fn new(period: usize, qubits: usize, g0: f64, g1: f64) -> Result<Self> {
        if period < 2 {
            return Err(Error::InvalidChain(format!("period must be >= 2, got {period}")));
        }
        if qubits < 2 {
            return Err(Error::InvalidChain(format!("need at least 2 qubits, got {qubits}")));
        }
        if g1 <= 0.0 || !g1.is_finite() {
            return Err(Error::InvalidChain(format!("g1 must be positive, got {g1}")));
        }
        if !g0.is_finite() {
            return Err(Error::InvalidChain(format!("g0 must be finite, got {g0}")));
        }
        Ok(Self { period, qubits, g0, g1 })
    }

    /// The `p = 2` chain used for single-qubit transfer (`g0 = g1 = 1`).
    pub fn ssh(qubits: usize) -> Result<Self> {
        Self::new(2, qubits, 1.0, 1.0)
    }

    /// The `p = 3` chain used for Bell-pair transfer (`g0 = 0`, `g1 = 1`).
    pub fn trimer(qubits: usize) -> Result<Self> {
        Self::new(3, qubits, 0.0, 1.0)
    }

    pub fn bonds(&self) -> usize {
        self.qubits - 1
    }

    /// Number of (possibly truncated) unit cells.
    pub fn cells(&self) -> usize {
        self.qubits.div_ceil(self.period)
    }

    /// `M = 2N - 1`, required by the single-qubit protocol.
    pub fn check_odd_p2(&self) -> Result<()> {
        if self.period != 2 || self.qubits.is_multiple_of(2) {
            return Err(Error::InvalidChain(format!(
                "expected p = 2 with an odd qubit count, got p = {} and M = {}",
                self.period, self.qubits
            )));
        }
        Ok(())
    }

    /// `M = 3N - 1`, required by the Bell-pair protocol.
    pub fn check_truncated_p3(&self) -> Result<()> {
        if self.period != 3 || self.qubits % 3 != 2 {
            return Err(Error::InvalidChain(format!(
                "expected p = 3 with M = 2 (mod 3), got p = {} and M = {}",
                self.period, self.qubits
            )));
        }
        Ok(())
    }

    /// Coupling of the `s`-th bond inside a unit cell (`s = 1..=p`).
    pub fn cell_coupling(&self, s: usize, theta: f64) -> f64 {
        self.g0 + self.g1 * (2.0 * PI * s as f64 / self.period as f64 + theta).cos()
    }
}

/// Nearest-neighbour coupling strengths `J_1 .. J_{M-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub values: Vec<f64>,
}

impl Couplings {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Couplings of the clean chain at phase `theta`.
///
/// The `p` distinct cosines are evaluated once and repeated, so the profile is
/// exactly periodic in the bond index.
pub fn coupling_profile(spec: &ChainSpec, theta: f64) -> Couplings {
    let cell: Vec<f64> = (1..=spec.period).map(|s| spec.cell_coupling(s, theta)).collect();
    let values = (0..spec.bonds()).map(|i| cell[i % spec.period]).collect();
    Couplings { values }
}

/// Adds the static offsets of `disorder` to `couplings`.
pub fn apply_disorder(couplings: &Couplings, disorder: &DisorderRealization) -> Result<Couplings> {
    if couplings.len() != disorder.offsets.len() {
        return Err(Error::LengthMismatch {
            expected: couplings.len(),
            actual: disorder.offsets.len(),
        });
    }
    let values = couplings
        .values
        .iter()
        .zip(&disorder.offsets)
        .map(|(j, dj)| j + dj)
        .collect();
    Ok(Couplings { values })
}

/// Linear sweep `θ(t) = θ0 + Ωt` for `t ∈ [0, t_final]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    pub theta0: f64,
    pub omega: f64,
    pub t_final: f64,
}

impl RampSchedule {
    pub fn new(theta0: f64, omega: f64, t_final: f64) -> Result<Self> {
        if omega <= 0.0 || !omega.is_finite() {
            return Err(Error::InvalidArgument(format!("ramp rate must be positive, got {omega}")));
        }
        if t_final <= 0.0 || !t_final.is_finite() {
            return Err(Error::InvalidArgument(format!("t_final must be positive, got {t_final}")));
        }
        Ok(Self { theta0, omega, t_final })
    }

    /// Ramp from `theta_start` to `theta_end` at rate `omega`.
    pub fn sweep(theta_start: f64, theta_end: f64, omega: f64) -> Result<Self> {
        if theta_end.partial_cmp(&theta_start) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidArgument(format!(
                "sweep must increase theta: {theta_start} -> {theta_end}"
            )));
        }
        Self::new(theta_start, omega, (theta_end - theta_start) / omega)
    }

    pub fn theta_at(&self, t: f64) -> f64 {
        self.theta0 + self.omega * t
    }

    pub fn theta_final(&self) -> f64 {
        self.theta_at(self.t_final)
    }

    /// The same path traversed backwards in time (negative rate).
    pub fn reversed(&self) -> Self {
        Self { theta0: self.theta_final(), omega: -self.omega, t_final: self.t_final }
    }
}

/// Quenched coupling offsets `δJ_x = W δ_x`, `δ_x ~ U[-0.5, 0.5]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub w: f64,
    pub offsets: Vec<f64>,
    pub seed: u64,
}

/// Draws `count` offsets of strength `w` from a ChaCha8 stream seeded with `seed`.
pub fn sample_disorder(w: f64, count: usize, seed: u64) -> Result<DisorderRealization> {
    if w < 0.0 || !w.is_finite() {
        return Err(Error::InvalidArgument(format!("disorder strength must be >= 0, got {w}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offsets = (0..count).map(|_| w * rng.gen_range(-0.5..=0.5)).collect();
    Ok(DisorderRealization { w, offsets, seed })
}

/// One SplitMix64 output for state `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sample `sample_index` at disorder grid point `w_index`:
/// `splitmix64(splitmix64(master ^ splitmix64(w_index)) ^ sample_index)`.
pub fn derive_seed(master: u64, w_index: u64, sample_index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(w_index)) ^ sample_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn p2_profile_at_landmark_angles() {
        let spec = ChainSpec::ssh(5).unwrap();
        assert_eq!(coupling_profile(&spec, 0.0).values, vec![0.0, 2.0, 0.0, 2.0]);
        let mid = coupling_profile(&spec, PI / 2.0);
        assert!(close(&mid.values, &[1.0; 4], 1e-15));
        let end = coupling_profile(&spec, PI);
        assert_eq!(end.values, vec![2.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn p3_profile_at_pi_over_6() {
        let spec = ChainSpec::trimer(5).unwrap();
        let h = 3f64.sqrt() / 2.0;
        let c = coupling_profile(&spec, PI / 6.0);
        assert!(close(&c.values, &[-h, 0.0, h, -h], 1e-15), "{:?}", c.values);
    }

    #[test]
    fn p2_matches_reduced_form() {
        let spec = ChainSpec::new(2, 7, 0.7, 1.0).unwrap();
        for k in 0..50 {
            let theta = k as f64 * 0.13;
            let c = coupling_profile(&spec, theta);
            let j1 = 0.7 - theta.cos();
            let j2 = 0.7 + theta.cos();
            for (i, v) in c.values.iter().enumerate() {
                let expect = if i % 2 == 0 { j1 } else { j2 };
                assert!((v - expect).abs() < 1e-14);
            }
            assert!((c.values[0] + c.values[1] - 1.4).abs() < 1e-14);
        }
    }

    #[test]
    fn p3_cell_sum_is_three_g0() {
        let spec = ChainSpec::new(3, 11, 0.3, 1.0).unwrap();
        for k in 0..40 {
            let c = coupling_profile(&spec, k as f64 * 0.17);
            assert!((c.values[0] + c.values[1] + c.values[2] - 0.9).abs() < 1e-14);
            assert_eq!(c.values[0], c.values[3]);
            assert_eq!(c.values[1], c.values[4]);
        }
    }

    #[test]
    fn disorder_addition() {
        let base = Couplings::new(vec![0.0, 2.0, 0.0, 2.0]);
        let zero = DisorderRealization { w: 0.0, offsets: vec![0.0; 4], seed: 0 };
        assert_eq!(apply_disorder(&base, &zero).unwrap(), base);

        let c = Couplings::new(vec![1.0, 1.0]);
        let d = DisorderRealization { w: 0.1, offsets: vec![0.05, -0.05], seed: 0 };
        let out = apply_disorder(&c, &d).unwrap();
        assert!(close(&out.values, &[1.05, 0.95], 1e-15));
        assert_eq!(c.values, vec![1.0, 1.0]);
    }

    #[test]
    fn disorder_length_mismatch() {
        let c = Couplings::new(vec![1.0, 1.0]);
        let d = sample_disorder(0.1, 3, 1).unwrap();
        assert_eq!(
            apply_disorder(&c, &d),
            Err(Error::LengthMismatch { expected: 2, actual: 3 })
        );
    }

    #[test]
    fn disorder_sampling_contract() {
        let zero = sample_disorder(0.0, 10, 99).unwrap();
        assert!(zero.offsets.iter().all(|&x| x == 0.0));

        let d = sample_disorder(0.1, 8, 42).unwrap();
        assert_eq!(d.offsets.len(), 8);
        assert!(d.offsets.iter().all(|x| x.abs() <= 0.05));

        let d6 = sample_disorder(0.6, 1000, 3).unwrap();
        assert!(d6.offsets.iter().all(|x| x.abs() <= 0.3));

        assert!(sample_disorder(-0.1, 3, 1).is_err());
        assert_eq!(sample_disorder(0.3, 20, 5), sample_disorder(0.3, 20, 5));
        assert_ne!(sample_disorder(0.3, 20, 5), sample_disorder(0.3, 20, 6));
    }

    #[test]
    fn disorder_mean_is_zero_within_three_standard_errors() {
        let n = 100_000;
        let d = sample_disorder(1.0, n, 2024).unwrap();
        let mean = d.offsets.iter().sum::<f64>() / n as f64;
        // Var(U[-0.5, 0.5]) = 1/12
        let se = (1.0 / 12.0 / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean}, se {se}");
        let var = d.offsets.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 1.0 / 12.0).abs() < 0.002);
    }

    #[test]
    fn schedule_validation_and_reverse() {
        assert!(RampSchedule::new(0.0, 0.0, 1.0).is_err());
        assert!(RampSchedule::new(0.0, 0.1, -1.0).is_err());
        let s = RampSchedule::sweep(0.0, PI, 0.01).unwrap();
        assert!((s.t_final - PI / 0.01).abs() < 1e-9);
        let r = s.reversed();
        assert!((r.theta_at(0.0) - PI).abs() < 1e-12);
        assert!(r.theta_at(r.t_final).abs() < 1e-12);
    }

    #[test]
    fn chain_validation() {
        assert!(ChainSpec::new(1, 5, 1.0, 1.0).is_err());
        assert!(ChainSpec::new(2, 1, 1.0, 1.0).is_err());
        assert!(ChainSpec::new(2, 5, 1.0, 0.0).is_err());
        assert!(ChainSpec::ssh(9).unwrap().check_odd_p2().is_ok());
        assert!(ChainSpec::ssh(8).unwrap().check_odd_p2().is_err());
        assert!(ChainSpec::trimer(8).unwrap().check_truncated_p3().is_ok());
        assert!(ChainSpec::trimer(9).unwrap().check_truncated_p3().is_err());
        assert_eq!(ChainSpec::ssh(9).unwrap().cells(), 5);
        assert_eq!(ChainSpec::trimer(8).unwrap().cells(), 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn profile_is_two_pi_periodic(theta in -10.0f64..10.0, p in 2usize..6, m in 2usize..30) {
                let spec = ChainSpec::new(p, m, 0.4, 1.0).unwrap();
                let a = coupling_profile(&spec, theta);
                let b = coupling_profile(&spec, theta + 2.0 * PI);
                for (x, y) in a.values.iter().zip(&b.values) {
                    prop_assert!((x - y).abs() < 1e-13);
                }
            }

            #[test]
            fn offsets_bounded_by_half_w(w in 0.0f64..3.0, seed: u64, n in 0usize..64) {
                let d = sample_disorder(w, n, seed).unwrap();
                prop_assert!(d.offsets.iter().all(|x| x.abs() <= 0.5 * w));
            }
        }
    }
}
