//! Closed-form edge states of the `p = 2` and `p = 3` chains.
//!
//! Both are geometric in the unit-cell index: the amplitude of cell `x` is
//! `λ^x` times a fixed cell pattern. For `p = 2` the pattern is `(1, 0)` with
//! `λ = −J_1/J_2` and `E = 0`; for `p = 3` it is `(1, ±1, 0)/√2` with
//! `λ = ∓J_2/J_3` and `E = ±J_1`. On the finite open chain these are exact
//! eigenpairs for every `θ`, not only asymptotically.
//!
//! Sign convention: the reference cell (left-most for `|λ| ≤ 1`, right-most
//! otherwise) carries a positive `a`-amplitude.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ChainSpec;
use crate::state::WaveVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(Error::InvalidArgument(format!("unknown branch '{other}'"))),
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

/// Decay factor, cell amplitudes and energy of one edge mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStateAnsatz {
    /// `None` when the decay factor diverges (right-decoupled limit).
    pub lambda: Option<f64>,
    pub cell_amplitudes: Vec<f64>,
    pub energy: f64,
    pub branch: Option<Branch>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeSide {
    Left,
    Right,
    Delocalized,
}

pub fn edge_side(lambda: f64) -> EdgeSide {
    let m = lambda.abs();
    if m < 1.0 {
        EdgeSide::Left
    } else if m > 1.0 {
        EdgeSide::Right
    } else {
        EdgeSide::Delocalized
    }
}

/// `λ = −J_1/J_2` with `J_{1,2} = g0 ∓ g1 cos θ`.
pub fn lambda_p2(g0: f64, g1: f64, theta: f64) -> Result<f64> {
    let j1 = g0 - g1 * theta.cos();
    let j2 = g0 + g1 * theta.cos();
    if j2 == 0.0 {
        return Err(Error::RightDecoupled);
    }
    Ok(-j1 / j2)
}

/// `Σ_{k<n} r^{2k}`.
pub fn geometric_norm_sq(r: f64, n: usize) -> f64 {
    let r2 = r * r;
    if (1.0 - r2).abs() < 1e-4 {
        // closed form cancels badly near |r| = 1
        (0..n).map(|k| r2.powi(k as i32)).sum()
    } else {
        (1.0 - r2.powi(n as i32)) / (1.0 - r2)
    }
}

/// Places `pattern` in each of `cells` cells with geometric weights.
///
/// `num/den` is the ratio between neighbouring cells. If `|num| <= |den|` the
/// weights are `λ^{x-1}` counted from the left; otherwise `(den/num)^{N-x}`
/// counted from the right, which stays finite when `den = 0`.
fn geometric_state(spec: &ChainSpec, pattern: &[f64], num: f64, den: f64) -> WaveVector {
    let n = spec.cells();
    let p = spec.period;
    let (ratio, from_left) = if num.abs() <= den.abs() { (num / den, true) } else { (den / num, false) };
    let norm = (geometric_norm_sq(ratio, n) * pattern.iter().map(|c| c * c).sum::<f64>()).sqrt();
    let mut amps = vec![0.0; spec.qubits];
    for x in 0..n {
        let k = if from_left { x } else { n - 1 - x };
        let weight = ratio.powi(k as i32) / norm;
        for (j, c) in pattern.iter().enumerate() {
            let site = x * p + j;
            if site < spec.qubits {
                amps[site] = weight * c;
            }
        }
    }
    WaveVector::from_real(&amps)
}

pub fn ansatz_p2(spec: &ChainSpec, theta: f64) -> Result<EdgeStateAnsatz> {
    spec.check_odd_p2()?;
    Ok(EdgeStateAnsatz {
        lambda: lambda_p2(spec.g0, spec.g1, theta).ok(),
        cell_amplitudes: vec![1.0, 0.0],
        energy: 0.0,
        branch: None,
    })
}

/// Zero-energy edge state of an odd `p = 2` chain, supported on the `a` sites.
pub fn analytic_edge_p2(spec: &ChainSpec, theta: f64) -> Result<WaveVector> {
    spec.check_odd_p2()?;
    let j1 = spec.cell_coupling(1, theta);
    let j2 = spec.cell_coupling(2, theta);
    Ok(geometric_state(spec, &[1.0, 0.0], -j1, j2))
}

fn check_p3_closed_form(spec: &ChainSpec) -> Result<()> {
    spec.check_truncated_p3()?;
    if spec.g0 != 0.0 {
        return Err(Error::InvalidChain(format!(
            "closed-form p = 3 edge states need g0 = 0, got {}",
            spec.g0
        )));
    }
    Ok(())
}

pub fn ansatz_p3(spec: &ChainSpec, theta: f64, branch: Branch) -> Result<EdgeStateAnsatz> {
    check_p3_closed_form(spec)?;
    let s = branch.sign();
    let j2 = spec.cell_coupling(2, theta);
    let j3 = spec.cell_coupling(3, theta);
    Ok(EdgeStateAnsatz {
        lambda: (j3 != 0.0).then(|| -s * j2 / j3),
        cell_amplitudes: vec![FRAC_1_SQRT_2, s * FRAC_1_SQRT_2, 0.0],
        energy: s * spec.cell_coupling(1, theta),
        branch: Some(branch),
    })
}

/// Edge state of a `p = 3`, `M = 3N − 1`, `g0 = 0` chain on the `a`/`b` sites,
/// with its energy `±J_1(θ)`.
pub fn analytic_edge_p3(spec: &ChainSpec, theta: f64, branch: Branch) -> Result<(WaveVector, f64)> {
    check_p3_closed_form(spec)?;
    let s = branch.sign();
    let j2 = spec.cell_coupling(2, theta);
    let j3 = spec.cell_coupling(3, theta);
    let state = geometric_state(spec, &[1.0, s, 0.0], -s * j2, j3);
    Ok((state, s * spec.cell_coupling(1, theta)))
}

/// Named reference states of the two protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Landmark {
    /// Excitation on the first qubit.
    L,
    /// Excitation on the last qubit.
    R,
    /// `Σ_x (−1)^x a_x / √N`.
    W,
    LPlus,
    LMinus,
    RPlus,
    RMinus,
    WPlus,
    WMinus,
}

impl Landmark {
    pub fn left(branch: Branch) -> Self {
        match branch {
            Branch::Plus => Landmark::LPlus,
            Branch::Minus => Landmark::LMinus,
        }
    }

    pub fn right(branch: Branch) -> Self {
        match branch {
            Branch::Plus => Landmark::RPlus,
            Branch::Minus => Landmark::RMinus,
        }
    }
}

pub fn landmark(spec: &ChainSpec, name: Landmark) -> Result<WaveVector> {
    use Landmark::*;
    let m = spec.qubits;
    let mut amps = vec![0.0; m];
    match name {
        L | R | W => {
            spec.check_odd_p2()?;
            match name {
                L => amps[0] = 1.0,
                R => amps[m - 1] = 1.0,
                _ => {
                    let n = spec.cells();
                    let a = 1.0 / (n as f64).sqrt();
                    for x in 1..=n {
                        amps[2 * (x - 1)] = if x % 2 == 0 { a } else { -a };
                    }
                }
            }
        }
        _ => {
            spec.check_truncated_p3()?;
            let r = FRAC_1_SQRT_2;
            match name {
                LPlus | LMinus => {
                    amps[0] = r;
                    amps[1] = if name == LPlus { r } else { -r };
                }
                RPlus | RMinus => {
                    amps[m - 2] = r;
                    amps[m - 1] = if name == RPlus { r } else { -r };
                }
                _ => {
                    // W+ alternates cell signs (λ = −1); W− does not (λ = +1)
                    let n = spec.cells();
                    let a = 1.0 / ((2 * n) as f64).sqrt();
                    for x in 1..=n {
                        let (cell_sign, b_sign) = match name {
                            WPlus => (if x % 2 == 0 { 1.0 } else { -1.0 }, 1.0),
                            _ => (1.0, -1.0),
                        };
                        amps[3 * (x - 1)] = cell_sign * a;
                        amps[3 * (x - 1) + 1] = cell_sign * b_sign * a;
                    }
                }
            }
        }
    }
    Ok(WaveVector::from_real(&amps))
}

/// `θ` at which the `p = 3` edge states sit at the left/right decoupled points
/// and the delocalized W point.
pub mod p3_angles {
    use super::PI;
    pub const LEFT: f64 = PI / 6.0;
    pub const W: f64 = PI / 3.0;
    pub const RIGHT: f64 = PI / 2.0;
}
