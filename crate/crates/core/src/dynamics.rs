//! Fixed-step RK4 integration of `i dψ/dt = H(θ(t)) ψ` in the
//! one-excitation sector.
//!
//! `H(t)` is rebuilt from `θ(t)` at every stage (no interpolation) and applied
//! in O(M). The vacuum amplitude is carried along unchanged because the
//! hopping Hamiltonian annihilates `|G⟩`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{build_single_excitation, TridiagonalHamiltonian};
use crate::model::{apply_disorder, coupling_profile, ChainSpec, DisorderRealization, RampSchedule};
use crate::state::WaveVector;

pub const DEFAULT_DT: f64 = 0.01;

/// Integration aborts once `|‖ψ‖ − 1|` exceeds this.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Tolerance on the initial state norm.
pub const INITIAL_NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    /// Snapshot stride in steps; 0 keeps only the final state.
    pub record_every: usize,
    /// Re-run at `dt/2` and report the final-state deviation.
    pub convergence_check: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { dt: DEFAULT_DT, record_every: 0, convergence_check: false }
    }
}

impl EvolutionConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub half_dt: f64,
    pub half_dt_final_state: WaveVector,
    /// `‖ψ_dt(t_f) − ψ_{dt/2}(t_f)‖`.
    pub final_state_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<WaveVector>,
    pub final_state: WaveVector,
    pub norm_drift_max: f64,
    pub steps: usize,
    pub convergence: Option<ConvergenceReport>,
}

/// `H(t)` of the (optionally disordered) chain along `schedule`.
pub fn hamiltonian_at(
    spec: &ChainSpec,
    schedule: &RampSchedule,
    disorder: Option<&DisorderRealization>,
    t: f64,
) -> Result<TridiagonalHamiltonian> {
    let slack = 1e-9 * schedule.t_final.max(1.0);
    if !(t >= -slack && t <= schedule.t_final + slack) {
        return Err(Error::TimeOutOfRange { t, t_final: schedule.t_final });
    }
    let clean = coupling_profile(spec, schedule.theta_at(t));
    let couplings = match disorder {
        Some(d) => apply_disorder(&clean, d)?,
        None => clean,
    };
    Ok(build_single_excitation(&couplings))
}

/// Time-dependent generator with preallocated RK4 work buffers.
struct Propagator<'a> {
    spec: &'a ChainSpec,
    schedule: &'a RampSchedule,
    offsets: Option<&'a [f64]>,
    cell: Vec<f64>,
    bonds: Vec<f64>,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl<'a> Propagator<'a> {
    fn new(
        spec: &'a ChainSpec,
        schedule: &'a RampSchedule,
        disorder: Option<&'a DisorderRealization>,
    ) -> Result<Self> {
        let offsets = match disorder {
            Some(d) if d.offsets.len() != spec.bonds() => {
                return Err(Error::LengthMismatch { expected: spec.bonds(), actual: d.offsets.len() })
            }
            Some(d) => Some(d.offsets.as_slice()),
            None => None,
        };
        let m = spec.qubits;
        let zero = C64::new(0.0, 0.0);
        Ok(Self {
            spec,
            schedule,
            offsets,
            cell: vec![0.0; spec.period],
            bonds: vec![0.0; spec.bonds()],
            k: std::array::from_fn(|_| vec![zero; m]),
            tmp: vec![zero; m],
        })
    }

    fn load_couplings(&mut self, t: f64) {
        let theta = self.schedule.theta_at(t);
        let p = self.spec.period;
        for (s, c) in self.cell.iter_mut().enumerate() {
            *c = self.spec.cell_coupling(s + 1, theta);
        }
        for (i, b) in self.bonds.iter_mut().enumerate() {
            *b = self.cell[i % p];
        }
        if let Some(off) = self.offsets {
            for (b, d) in self.bonds.iter_mut().zip(off) {
                *b += d;
            }
        }
    }

    /// `out = −i H(t) ψ`.
    fn derivative(bonds: &[f64], psi: &[C64], out: &mut [C64]) {
        let n = psi.len();
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            if i > 0 {
                acc += psi[i - 1] * bonds[i - 1];
            }
            if i + 1 < n {
                acc += psi[i + 1] * bonds[i];
            }
            out[i] = C64::new(acc.im, -acc.re);
        }
    }

    #[allow(clippy::needless_range_loop)]
    fn step(&mut self, psi: &mut [C64], t: f64, dt: f64) {
        let n = psi.len();
        self.load_couplings(t);
        Self::derivative(&self.bonds, psi, &mut self.k[0]);

        self.load_couplings(t + 0.5 * dt);
        for i in 0..n {
            self.tmp[i] = psi[i] + self.k[0][i] * (0.5 * dt);
        }
        Self::derivative(&self.bonds, &self.tmp, &mut self.k[1]);
        for i in 0..n {
            self.tmp[i] = psi[i] + self.k[1][i] * (0.5 * dt);
        }
        Self::derivative(&self.bonds, &self.tmp, &mut self.k[2]);

        self.load_couplings(t + dt);
        for i in 0..n {
            self.tmp[i] = psi[i] + self.k[2][i] * dt;
        }
        Self::derivative(&self.bonds, &self.tmp, &mut self.k[3]);

        let w = dt / 6.0;
        for i in 0..n {
            psi[i] += (self.k[0][i] + (self.k[1][i] + self.k[2][i]) * 2.0 + self.k[3][i]) * w;
        }
    }
}

/// One classical RK4 step of length `dt` from time `t`.
pub fn rk4_step(
    spec: &ChainSpec,
    schedule: &RampSchedule,
    disorder: Option<&DisorderRealization>,
    psi: &WaveVector,
    t: f64,
    dt: f64,
) -> Result<WaveVector> {
    if psi.len() != spec.qubits {
        return Err(Error::LengthMismatch { expected: spec.qubits, actual: psi.len() });
    }
    let mut prop = Propagator::new(spec, schedule, disorder)?;
    let mut out = psi.clone();
    prop.step(&mut out.amplitudes, t, dt);
    Ok(out)
}

/// Integrates from `t = 0` to `t_final`; the last step is shortened to land
/// exactly on `t_final`.
pub fn evolve(
    spec: &ChainSpec,
    schedule: &RampSchedule,
    disorder: Option<&DisorderRealization>,
    psi0: &WaveVector,
    cfg: &EvolutionConfig,
) -> Result<Trajectory> {
    let mut traj = integrate(spec, schedule, disorder, psi0, cfg.dt, cfg.record_every)?;
    if cfg.convergence_check {
        let half = integrate(spec, schedule, disorder, psi0, 0.5 * cfg.dt, 0)?;
        let deviation = traj
            .final_state
            .amplitudes
            .iter()
            .zip(&half.final_state.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        traj.convergence = Some(ConvergenceReport {
            half_dt: 0.5 * cfg.dt,
            half_dt_final_state: half.final_state,
            final_state_deviation: deviation,
        });
    }
    Ok(traj)
}

fn integrate(
    spec: &ChainSpec,
    schedule: &RampSchedule,
    disorder: Option<&DisorderRealization>,
    psi0: &WaveVector,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if dt > schedule.t_final {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} exceeds the schedule length {}",
            schedule.t_final
        )));
    }
    if psi0.len() != spec.qubits {
        return Err(Error::LengthMismatch { expected: spec.qubits, actual: psi0.len() });
    }
    psi0.check_normalized(INITIAL_NORM_TOLERANCE)?;

    let t_final = schedule.t_final;
    let steps = ((t_final / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let vac_sq = psi0.vacuum.norm_sqr();
    let mut prop = Propagator::new(spec, schedule, disorder)?;
    let mut psi = psi0.amplitudes.clone();

    let mut times = Vec::new();
    let mut states = Vec::new();
    if record_every > 0 {
        times.push(0.0);
        states.push(psi0.clone());
    }

    let mut drift_max: f64 = 0.0;
    for k in 0..steps {
        let t = k as f64 * dt;
        let h = if k + 1 == steps { t_final - t } else { dt };
        prop.step(&mut psi, t, h);

        let norm = (psi.iter().map(|a| a.norm_sqr()).sum::<f64>() + vac_sq).sqrt();
        let drift = (norm - 1.0).abs();
        drift_max = drift_max.max(drift);
        if drift > NORM_DRIFT_LIMIT || !norm.is_finite() {
            return Err(Error::NormDrift { drift, limit: NORM_DRIFT_LIMIT, dt });
        }
        let last = k + 1 == steps;
        if record_every > 0 && ((k + 1) % record_every == 0 || last) {
            times.push(if last { t_final } else { t + h });
            states.push(WaveVector::new(psi.clone(), psi0.vacuum));
        }
    }

    Ok(Trajectory {
        times,
        states,
        final_state: WaveVector::new(psi, psi0.vacuum),
        norm_drift_max: drift_max,
        steps,
        convergence: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgestates::{landmark, Landmark};
    use crate::model::sample_disorder;
    use std::f64::consts::PI;

    fn two_site() -> (ChainSpec, RampSchedule) {
        // p = 2 at θ = π/2 has J = 1; a negligible rate keeps θ frozen
        let spec = ChainSpec::new(2, 2, 1.0, 1.0).unwrap();
        let sched = RampSchedule::new(PI / 2.0, 1e-300, 10.0).unwrap();
        (spec, sched)
    }

    #[test]
    fn hamiltonian_at_examples() {
        let spec = ChainSpec::ssh(9).unwrap();
        let s = RampSchedule::sweep(0.0, PI, 0.01).unwrap();
        let h0 = hamiltonian_at(&spec, &s, None, 0.0).unwrap();
        assert_eq!(&h0.offdiagonal[..4], &[0.0, 2.0, 0.0, 2.0]);
        let hf = hamiltonian_at(&spec, &s, None, s.t_final).unwrap();
        for (i, v) in hf.offdiagonal.iter().enumerate() {
            let expect = if i % 2 == 0 { 2.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12);
        }
        assert!(hamiltonian_at(&spec, &s, None, s.t_final * 1.01).is_err());
        assert!(hamiltonian_at(&spec, &s, None, -1.0).is_err());

        let d = sample_disorder(0.1, 8, 4).unwrap();
        for t in [0.0, 50.0, 200.0] {
            let clean = hamiltonian_at(&spec, &s, None, t).unwrap();
            let dis = hamiltonian_at(&spec, &s, Some(&d), t).unwrap();
            for ((a, b), o) in dis.offdiagonal.iter().zip(&clean.offdiagonal).zip(&d.offsets) {
                assert!((a - b - o).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_generator_leaves_state_unchanged() {
        // p = 2, g0 = g1, θ = 0 with all J_1 bonds zero on a 2-site chain
        let spec = ChainSpec::new(2, 2, 1.0, 1.0).unwrap();
        let s = RampSchedule::new(0.0, 1e-300, 1.0).unwrap();
        let psi = WaveVector::from_real(&[0.6, 0.8]);
        let out = rk4_step(&spec, &s, None, &psi, 0.0, 0.1).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn rabi_oscillation() {
        let (spec, _) = two_site();
        let sched = RampSchedule::new(PI / 2.0, 1e-300, PI / 2.0).unwrap();
        let psi0 = WaveVector::basis(2, 0);
        let traj = evolve(&spec, &sched, None, &psi0, &EvolutionConfig::with_dt(1e-3)).unwrap();
        let f = &traj.final_state.amplitudes;
        assert!(f[0].norm() < 1e-9, "{f:?}");
        assert!((f[1] - C64::new(0.0, -1.0)).norm() < 1e-9);
    }

    #[test]
    fn local_error_is_fifth_order() {
        let (spec, sched) = two_site();
        let psi0 = WaveVector::basis(2, 0);
        let hs = [0.2, 0.1, 0.05, 0.025];
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let out = rk4_step(&spec, &sched, None, &psi0, 0.0, h).unwrap();
                let exact = [C64::new(h.cos(), 0.0), C64::new(0.0, -h.sin())];
                out.amplitudes.iter().zip(exact).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 5.0).abs() < 0.2, "order {order}");
        }
    }

    #[test]
    fn vacuum_is_stationary() {
        let spec = ChainSpec::ssh(5).unwrap();
        let s = RampSchedule::sweep(0.0, PI, 0.5).unwrap();
        let g = WaveVector::ground(5);
        let cfg = EvolutionConfig { dt: 0.05, record_every: 10, convergence_check: false };
        let traj = evolve(&spec, &s, None, &g, &cfg).unwrap();
        assert!(traj.states.iter().all(|st| *st == g));
        assert_eq!(traj.final_state, g);
    }

    #[test]
    fn last_step_lands_on_t_final() {
        let spec = ChainSpec::ssh(3).unwrap();
        let s = RampSchedule::new(0.0, 0.1, 1.05).unwrap();
        let cfg = EvolutionConfig { dt: 0.1, record_every: 1, convergence_check: false };
        let traj = evolve(&spec, &s, None, &WaveVector::basis(3, 0), &cfg).unwrap();
        assert_eq!(traj.steps, 11);
        assert_eq!(*traj.times.last().unwrap(), 1.05);
        assert_eq!(traj.times.len(), 12);
    }

    #[test]
    fn sudden_quench_is_not_adiabatic() {
        let spec = ChainSpec::ssh(3).unwrap();
        let psi0 = landmark(&spec, Landmark::L).unwrap();
        let target = landmark(&spec, Landmark::R).unwrap();
        let fast = RampSchedule::sweep(0.0, PI, 20.0).unwrap();
        let coarse = evolve(&spec, &fast, None, &psi0, &EvolutionConfig::with_dt(1e-3)).unwrap();
        let fine = evolve(&spec, &fast, None, &psi0, &EvolutionConfig::with_dt(1e-4)).unwrap();
        let f = target.inner(&coarse.final_state).unwrap().norm();
        let f_ref = target.inner(&fine.final_state).unwrap().norm();
        assert!((f - f_ref).abs() < 1e-8);
        assert!(f < 0.5, "quench fidelity {f}");

        let slow = RampSchedule::sweep(0.0, PI, 0.01).unwrap();
        let ad = evolve(&spec, &slow, None, &psi0, &EvolutionConfig::default()).unwrap();
        assert!(target.inner(&ad.final_state).unwrap().norm() > 0.999);
    }

    #[test]
    fn forward_then_backward_returns_initial_state() {
        let spec = ChainSpec::ssh(9).unwrap();
        let psi0 = landmark(&spec, Landmark::L).unwrap();
        let fwd = RampSchedule::sweep(0.0, PI, 0.04).unwrap();
        let d = sample_disorder(0.1, 8, 77).unwrap();
        let cfg = EvolutionConfig::default();
        let mid = evolve(&spec, &fwd, Some(&d), &psi0, &cfg).unwrap();
        // H is real, so running time backwards is conjugate, evolve along the
        // reversed ramp, conjugate again
        let conj = WaveVector::new(
            mid.final_state.amplitudes.iter().map(|a| a.conj()).collect(),
            mid.final_state.vacuum.conj(),
        );
        let back = evolve(&spec, &fwd.reversed(), Some(&d), &conj, &cfg).unwrap();
        let restored = WaveVector::new(
            back.final_state.amplitudes.iter().map(|a| a.conj()).collect(),
            back.final_state.vacuum.conj(),
        );
        let infidelity = 1.0 - psi0.inner(&restored).unwrap().norm();
        assert!(infidelity <= 1e-8, "{infidelity}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = ChainSpec::ssh(3).unwrap();
        let s = RampSchedule::new(0.0, 0.1, 1.0).unwrap();
        let bad = WaveVector::from_real(&[1.0, 1.0, 0.0]);
        assert!(matches!(
            evolve(&spec, &s, None, &bad, &EvolutionConfig::default()),
            Err(Error::NotNormalized { .. })
        ));
        let ok = WaveVector::basis(3, 0);
        assert!(evolve(&spec, &s, None, &ok, &EvolutionConfig::with_dt(2.0)).is_err());
        assert!(evolve(&spec, &s, None, &ok, &EvolutionConfig::with_dt(0.0)).is_err());
    }

    #[test]
    fn huge_step_trips_norm_guard() {
        let spec = ChainSpec::ssh(5).unwrap();
        let s = RampSchedule::new(PI / 2.0, 0.01, 50.0).unwrap();
        let psi = WaveVector::basis(5, 2);
        let res = evolve(&spec, &s, None, &psi, &EvolutionConfig::with_dt(1.0));
        assert!(matches!(res, Err(Error::NormDrift { .. })));
    }
}
