//! Single-excitation Hamiltonian, its spectrum, the bulk–edge gap and the
//! chiral-symmetry check.
//!
//! The hopping Hamiltonian conserves the number of excitations, so on the
//! one-excitation sector it is the `M × M` real symmetric tridiagonal matrix
//! whose off-diagonal holds the couplings. Basis state `k` is an excitation on
//! qubit `k`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{apply_disorder, coupling_profile, ChainSpec, Couplings, DisorderRealization};
use crate::state::WaveVector;

/// Sweeps allowed per eigenvalue before the QL iteration gives up.
pub const MAX_QL_SWEEPS: usize = 60;

/// Accepted distance between a requested eigenvalue and the nearest computed one.
pub const EIGENVALUE_MATCH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalHamiltonian {
    pub diagonal: Vec<f64>,
    pub offdiagonal: Vec<f64>,
}

impl TridiagonalHamiltonian {
    pub fn new(diagonal: Vec<f64>, offdiagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() || offdiagonal.len() + 1 != diagonal.len() {
            return Err(Error::LengthMismatch {
                expected: diagonal.len().saturating_sub(1),
                actual: offdiagonal.len(),
            });
        }
        Ok(Self { diagonal, offdiagonal })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// `y = H x` in O(M).
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = x[i] * self.diagonal[i];
            if i > 0 {
                acc += x[i - 1] * self.offdiagonal[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.offdiagonal[i];
            }
            y[i] = acc;
        }
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = x[i] * self.diagonal[i];
                if i > 0 {
                    acc += x[i - 1] * self.offdiagonal[i - 1];
                }
                if i + 1 < n {
                    acc += x[i + 1] * self.offdiagonal[i];
                }
                acc
            })
            .collect()
    }

    /// `‖H v − E v‖₂` over the chain amplitudes.
    pub fn residual(&self, v: &WaveVector, energy: f64) -> f64 {
        let mut hv = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(&v.amplitudes, &mut hv);
        hv.iter()
            .zip(&v.amplitudes)
            .map(|(h, a)| (h - a * energy).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `⟨ψ|H|ψ⟩` (the vacuum carries zero energy).
    pub fn expectation(&self, v: &WaveVector) -> f64 {
        let mut hv = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(&v.amplitudes, &mut hv);
        v.amplitudes.iter().zip(&hv).map(|(a, h)| (a.conj() * h).re).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.diagonal.iter().map(|d| d * d).sum::<f64>()
            + 2.0 * self.offdiagonal.iter().map(|o| o * o).sum::<f64>()
    }
}

/// Hopping matrix of the one-excitation sector.
pub fn build_single_excitation(couplings: &Couplings) -> TridiagonalHamiltonian {
    TridiagonalHamiltonian {
        diagonal: vec![0.0; couplings.len() + 1],
        offdiagonal: couplings.values.clone(),
    }
}

/// Clean or disordered Hamiltonian of `spec` at phase `theta`.
pub fn chain_hamiltonian(
    spec: &ChainSpec,
    theta: f64,
    disorder: Option<&DisorderRealization>,
) -> Result<TridiagonalHamiltonian> {
    let clean = coupling_profile(spec, theta);
    let couplings = match disorder {
        Some(d) => apply_disorder(&clean, d)?,
        None => clean,
    };
    Ok(build_single_excitation(&couplings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

pub fn eigenvalues(h: &TridiagonalHamiltonian) -> Result<Spectrum> {
    let (values, _) = tridiagonal_ql(h, false)?;
    Ok(Spectrum { eigenvalues: values, eigenvectors: None })
}

pub fn eigensystem(h: &TridiagonalHamiltonian) -> Result<Spectrum> {
    let (values, vectors) = tridiagonal_ql(h, true)?;
    Ok(Spectrum { eigenvalues: values, eigenvectors: vectors })
}

/// Implicit-shift QL on a symmetric tridiagonal matrix (tql2 lineage).
///
/// One eigenvector per entry.
type Eigenvectors = Vec<Vec<f64>>;

/// Off-diagonals below `eps * max(|d| + |e|)` are treated as zero, which
/// splits block-decoupled chains into independent problems.
fn tridiagonal_ql(
    h: &TridiagonalHamiltonian,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Eigenvectors>)> {
    let n = h.dim();
    let mut d = h.diagonal.clone();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&h.offdiagonal);
    // z[k][i]: component k of vector i
    let mut z: Vec<Vec<f64>> = if want_vectors {
        (0..n).map(|k| (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect()).collect()
    } else {
        Vec::new()
    };

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence { index: l, iterations: MAX_QL_SWEEPS });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut hshift = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= hshift;
                }
                f += hshift;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    hshift = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = hshift + s * (c * g + s * d[i]);
                    if want_vectors {
                        for row in z.iter_mut() {
                            let t = row[i + 1];
                            row[i + 1] = s * row[i] + c * t;
                            row[i] = c * row[i] - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors
        .then(|| order.iter().map(|&i| (0..n).map(|k| z[k][i]).collect()).collect());
    Ok((values, vectors))
}

/// Unit eigenvector for `eigenvalue` by shifted inverse iteration.
///
/// Degenerate eigenvalues yield some unit vector of the eigenspace. The sign is
/// fixed so that the largest-magnitude component is positive.
pub fn eigenvector_for(h: &TridiagonalHamiltonian, eigenvalue: f64) -> Result<WaveVector> {
    let spectrum = eigenvalues(h)?;
    let nearest = spectrum
        .eigenvalues
        .iter()
        .copied()
        .min_by(|a, b| (a - eigenvalue).abs().total_cmp(&(b - eigenvalue).abs()))
        .expect("non-empty spectrum");
    let distance = (nearest - eigenvalue).abs();
    if distance > EIGENVALUE_MATCH_TOLERANCE {
        return Err(Error::NotAnEigenvalue { requested: eigenvalue, nearest, distance });
    }

    let n = h.dim();
    let scale = h.frobenius_sq().sqrt().max(1.0);
    let mut x: Vec<f64> = (0..n)
        .map(|k| 0.5 + (crate::model::splitmix64(k as u64) >> 11) as f64 / (1u64 << 53) as f64)
        .collect();
    normalize(&mut x);
    for _ in 0..4 {
        x = solve_shifted(h, nearest, &x, scale);
        normalize(&mut x);
    }
    let lead = x.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
    if lead < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(WaveVector::from_real(&x))
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

/// Solves `(H − σ) y = b` by Gaussian elimination with partial pivoting.
/// Exactly singular pivots are nudged to `eps · scale`.
fn solve_shifted(h: &TridiagonalHamiltonian, sigma: f64, rhs: &[f64], scale: f64) -> Vec<f64> {
    let n = h.dim();
    let mut b = rhs.to_vec();
    let mut d: Vec<f64> = h.diagonal.iter().map(|v| v - sigma).collect();
    if n == 1 {
        let piv = if d[0] == 0.0 { f64::EPSILON * scale } else { d[0] };
        return vec![b[0] / piv];
    }
    let mut du = h.offdiagonal.clone();
    // subdiagonal on input, second superdiagonal after a row swap
    let mut dl = h.offdiagonal.clone();
    let tiny = f64::EPSILON * scale;

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = 0.0;
            }
            du[i] = temp;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }

    b[n - 1] /= d[n - 1];
    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
    }
    b
}

/// One spectrum per grid point; the disorder realization is held fixed.
pub fn spectrum_sweep(
    spec: &ChainSpec,
    theta_grid: &[f64],
    disorder: Option<&DisorderRealization>,
) -> Result<Vec<Spectrum>> {
    if theta_grid.is_empty() {
        return Err(Error::InvalidArgument("empty theta grid".into()));
    }
    theta_grid
        .iter()
        .map(|&theta| eigenvalues(&chain_hamiltonian(spec, theta, disorder)?))
        .collect()
}

/// Closed-form edge energies: `0` for `p = 2`, `±J_1(θ)` for `p = 3`.
pub fn analytic_edge_energies(spec: &ChainSpec, theta: f64) -> Result<Vec<f64>> {
    match spec.period {
        2 => {
            spec.check_odd_p2()?;
            Ok(vec![0.0])
        }
        3 => {
            spec.check_truncated_p3()?;
            let j1 = spec.cell_coupling(1, theta);
            Ok(vec![j1, -j1])
        }
        p => Err(Error::InvalidChain(format!("no closed-form edge energies for p = {p}"))),
    }
}

/// Smallest distance between any edge eigenvalue and the nearest bulk
/// eigenvalue, for one sorted spectrum. Edge eigenvalues are those closest to
/// the analytic edge energies.
pub fn edge_gap_of(eigenvalues: &[f64], edge_energies: &[f64]) -> f64 {
    let mut edge_idx: Vec<usize> = Vec::with_capacity(edge_energies.len());
    for &target in edge_energies {
        let idx = (0..eigenvalues.len())
            .filter(|i| !edge_idx.contains(i))
            .min_by(|&a, &b| {
                (eigenvalues[a] - target).abs().total_cmp(&(eigenvalues[b] - target).abs())
            })
            .expect("more eigenvalues than edge modes");
        edge_idx.push(idx);
    }
    edge_idx
        .iter()
        .flat_map(|&e| {
            (0..eigenvalues.len())
                .filter(|i| !edge_idx.contains(i))
                .map(move |b| (eigenvalues[e] - eigenvalues[b]).abs())
        })
        .fold(f64::INFINITY, f64::min)
}

/// Uniform grid of `points` values covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Bulk–edge gap `Δ` of the clean chain, minimized over a θ grid.
pub fn bulk_edge_gap(spec: &ChainSpec, theta_range: (f64, f64), grid_points: usize) -> Result<f64> {
    bulk_edge_gap_with(spec, theta_range, grid_points, None)
}

pub fn bulk_edge_gap_with(
    spec: &ChainSpec,
    theta_range: (f64, f64),
    grid_points: usize,
    disorder: Option<&DisorderRealization>,
) -> Result<f64> {
    if grid_points == 0 {
        return Err(Error::InvalidArgument("gap needs at least one grid point".into()));
    }
    let mut gap = f64::INFINITY;
    for theta in linspace(theta_range.0, theta_range.1, grid_points) {
        let edges = analytic_edge_energies(spec, theta)?;
        let spectrum = eigenvalues(&chain_hamiltonian(spec, theta, disorder)?)?;
        gap = gap.min(edge_gap_of(&spectrum.eigenvalues, &edges));
    }
    Ok(gap)
}

/// `max |Γ H Γ + H|` with `Γ = diag((−1)^k)`.
pub fn chiral_residual(h: &TridiagonalHamiltonian) -> f64 {
    let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let diag = h.diagonal.iter().enumerate().map(|(k, &v)| (sign(k) * sign(k) * v + v).abs());
    let off = h
        .offdiagonal
        .iter()
        .enumerate()
        .map(|(k, &v)| (sign(k) * sign(k + 1) * v + v).abs());
    diag.chain(off).fold(0.0, f64::max)
}
