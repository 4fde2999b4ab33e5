//! Drive-photon-resolved golden-rule rates: Fourier components of the
//! coupling operator in the Floquet-mode basis, partial rates
//! a_{alpha beta, k} = 2 pi s(Delta_{alpha beta, k}) |S_{alpha beta, k}|^2
//! with Delta_{alpha beta, k} = eps_alpha - eps_beta + k Omega, and their
//! counting-field aggregates.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::bath::{spectral_s, BathParameters};
use crate::error::{Error, Result};
use crate::floquet::FloquetSolution;
use crate::linalg::{Matrix2, ZERO};

/// Relative Fourier-power tail tolerated outside the harmonic cutoff.
const TAIL_TOLERANCE: f64 = 1e-12;

/// Fourier components S_{alpha beta, k} of a coupling operator between
/// Floquet modes, k = -k_max ..= k_max.
///
/// Hermitian couplings satisfy S_{alpha beta, k} = conj(S_{beta alpha, -k});
/// traceless ones additionally S_{22,k} = -S_{11,k}.
#[derive(Debug, Clone)]
pub struct CouplingMatrixElements {
    k_max: usize,
    elements: [[Vec<Complex64>; 2]; 2],
}

impl CouplingMatrixElements {
    pub fn zeros(k_max: usize) -> Self {
        let col = vec![ZERO; 2 * k_max + 1];
        Self {
            k_max,
            elements: [[col.clone(), col.clone()], [col.clone(), col]],
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn get(&self, alpha: usize, beta: usize, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.k_max {
            return ZERO;
        }
        self.elements[alpha][beta][(k + self.k_max as i64) as usize]
    }

    pub fn set(&mut self, alpha: usize, beta: usize, k: i64, value: Complex64) {
        self.elements[alpha][beta][(k + self.k_max as i64) as usize] = value;
    }

    /// Largest Hermiticity residual |S_{ab,k} - conj(S_{ba,-k})|.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                for k in -(self.k_max as i64)..=self.k_max as i64 {
                    let d = (self.get(a, b, k) - self.get(b, a, -k).conj()).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }
}

/// One-period Fourier transform of the coupling operator in the mode basis:
///
///   S_{alpha beta, k} = (1/tau) int_0^tau <phi_alpha(t)| S |phi_beta(t)> e^{-i k Omega t} dt,
///
/// evaluated as the plain DFT of the uniformly sampled integrand (exact for
/// band-limited integrands, which Floquet-mode overlaps are to machine
/// precision once the grid resolves them).
///
/// Errors with `Truncation` if more than 1e-12 of the Parseval power of any
/// entry lies outside |k| <= k_max.
pub fn coupling_fourier(
    coupling: &Matrix2,
    sol: &FloquetSolution,
    k_max: usize,
) -> Result<CouplingMatrixElements> {
    let n = sol.n_grid();
    if n < 4 * k_max.max(1) {
        return Err(Error::Domain(format!(
            "mode grid {n} cannot resolve harmonics up to k_max = {k_max}"
        )));
    }
    // The counting-field algebra downstream assumes an observable coupling.
    let scale = coupling
        .iter()
        .flatten()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let defect = (coupling[0][1] - coupling[1][0].conj())
        .norm()
        .max(coupling[0][0].im.abs())
        .max(coupling[1][1].im.abs());
    if defect > 1e-12 * scale {
        return Err(Error::Domain(format!(
            "coupling operator is not Hermitian (defect {defect:.3e})"
        )));
    }
    let mut out = CouplingMatrixElements::zeros(k_max);
    let mut worst_tail = 0.0f64;
    let mut k_needed = k_max;
    for alpha in 0..2 {
        for beta in 0..2 {
            // f_j = <phi_alpha(t_j)| S |phi_beta(t_j)> over one period.
            let mut f = Vec::with_capacity(n);
            for j in 0..n {
                let ma = &sol.mode_samples[j][alpha];
                let mb = &sol.mode_samples[j][beta];
                let mut v = ZERO;
                for r in 0..2 {
                    for c in 0..2 {
                        v += ma[r].conj() * coupling[r][c] * mb[c];
                    }
                }
                f.push(v);
            }
            let total_power: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
            let mut captured = 0.0f64;
            for k in -(k_max as i64)..=k_max as i64 {
                let mut acc = ZERO;
                for (j, fj) in f.iter().enumerate() {
                    let angle = -2.0 * PI * (j as f64) * (k as f64) / n as f64;
                    acc += fj * Complex64::from_polar(1.0, angle);
                }
                let s_k = acc / n as f64;
                captured += s_k.norm_sqr();
                out.set(alpha, beta, k, s_k);
            }
            if total_power > 0.0 {
                let tail = ((total_power - captured) / total_power).max(0.0);
                if tail > TAIL_TOLERANCE {
                    worst_tail = worst_tail.max(tail);
                    // Scan upward to report the cutoff that would suffice.
                    let mut cum = captured;
                    let mut k = k_max as i64;
                    while cum < (1.0 - TAIL_TOLERANCE) * total_power && (k as usize) < n / 2 {
                        k += 1;
                        for kk in [k, -k] {
                            let mut acc = ZERO;
                            for (j, fj) in f.iter().enumerate() {
                                let angle = -2.0 * PI * (j as f64) * (kk as f64) / n as f64;
                                acc += fj * Complex64::from_polar(1.0, angle);
                            }
                            cum += (acc / n as f64).norm_sqr();
                        }
                    }
                    k_needed = k_needed.max(k as usize);
                }
            }
        }
    }
    if worst_tail > 0.0 {
        return Err(Error::Truncation {
            k_max,
            tail: worst_tail,
            k_needed,
        });
    }
    Ok(out)
}

/// Closed-form elements of the transverse coupling sigma_x at phi = 0:
/// S_{11,+-1} = -sin(2 theta)/2, S_{12,-1} = cos^2 theta,
/// S_{12,+1} = -sin^2 theta, the rest by Hermiticity and tracelessness.
pub fn sigma_x_elements(theta: f64, k_max: usize) -> Result<CouplingMatrixElements> {
    if k_max < 1 {
        return Err(Error::Domain(
            "sigma_x couples through k = +-1; k_max >= 1 required".into(),
        ));
    }
    let s2 = (2.0 * theta).sin();
    let (sin_t, cos_t) = theta.sin_cos();
    let mut out = CouplingMatrixElements::zeros(k_max);
    let re = |x: f64| Complex64::new(x, 0.0);
    out.set(0, 0, 1, re(-0.5 * s2));
    out.set(0, 0, -1, re(-0.5 * s2));
    out.set(1, 1, 1, re(0.5 * s2));
    out.set(1, 1, -1, re(0.5 * s2));
    out.set(0, 1, -1, re(cos_t * cos_t));
    out.set(0, 1, 1, re(-sin_t * sin_t));
    out.set(1, 0, 1, re(cos_t * cos_t));
    out.set(1, 0, -1, re(-sin_t * sin_t));
    Ok(out)
}

/// Closed-form elements of the longitudinal coupling sigma_z: a single k = 0
/// harmonic, S_{11,0} = cos 2theta, S_{12,0} = S_{21,0} = sin 2theta.
pub fn sigma_z_elements(theta: f64) -> CouplingMatrixElements {
    let mut out = CouplingMatrixElements::zeros(0);
    let re = |x: f64| Complex64::new(x, 0.0);
    out.set(0, 0, 0, re((2.0 * theta).cos()));
    out.set(1, 1, 0, re(-(2.0 * theta).cos()));
    out.set(0, 1, 0, re((2.0 * theta).sin()));
    out.set(1, 0, 0, re((2.0 * theta).sin()));
    out
}

/// One photon-resolved transition channel beta -> alpha exchanging
/// Delta = eps_alpha - eps_beta + k Omega with the bath.
#[derive(Debug, Clone, Copy)]
pub struct RateChannel {
    pub alpha: usize,
    pub beta: usize,
    pub k: i64,
    /// Bath energy Delta_{alpha beta, k}; the heat carried by one jump
    /// through this channel is -Delta.
    pub delta: f64,
    /// |S_{alpha beta, k}|^2.
    pub amp_sq: f64,
    /// a_{alpha beta, k} = 2 pi s(Delta) |S|^2 >= 0.
    pub rate: f64,
}

/// Full channel list plus the k-summed totals A_{alpha beta}.
#[derive(Debug, Clone)]
pub struct RateTable {
    pub channels: Vec<RateChannel>,
    /// totals[alpha][beta] = A_{alpha beta} = sum_k a_{alpha beta, k}.
    pub totals: [[f64; 2]; 2],
    pub quasienergies: [f64; 2],
    pub omega_r: f64,
    pub omega_drive: f64,
}

impl RateTable {
    pub fn tau(&self) -> f64 {
        2.0 * PI / self.omega_drive
    }

    /// Total relaxation rate Sigma = A12 + A21.
    pub fn sigma(&self) -> f64 {
        self.totals[0][1] + self.totals[1][0]
    }
}

/// Assembles the photon-resolved rate table from coupling elements, the
/// Floquet solution and the bath kernel.
pub fn partial_rates(
    elements: &CouplingMatrixElements,
    sol: &FloquetSolution,
    bath: &BathParameters,
) -> RateTable {
    let k_max = elements.k_max() as i64;
    let mut channels = Vec::with_capacity(4 * (2 * k_max as usize + 1));
    let mut totals = [[0.0f64; 2]; 2];
    for alpha in 0..2 {
        for beta in 0..2 {
            for k in -k_max..=k_max {
                let delta =
                    sol.quasienergies[alpha] - sol.quasienergies[beta] + k as f64 * sol.omega_drive;
                let amp_sq = elements.get(alpha, beta, k).norm_sqr();
                let rate = 2.0 * PI * spectral_s(delta, bath) * amp_sq;
                channels.push(RateChannel {
                    alpha,
                    beta,
                    k,
                    delta,
                    amp_sq,
                    rate,
                });
                totals[alpha][beta] += rate;
            }
        }
    }
    RateTable {
        channels,
        totals,
        quasienergies: sol.quasienergies,
        omega_r: sol.omega_r,
        omega_drive: sol.omega_drive,
    }
}

/// Counting-field aggregates A^nu_{alpha beta} = sum_k e^{-i nu Delta} a_{alpha beta, k}.
///
/// Channels are summed in table order, so at nu = 0 the real parts reproduce
/// `table.totals` bit for bit.
pub fn aggregate_nu(table: &RateTable, nu: f64) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for ch in &table.channels {
        out[ch.alpha][ch.beta] += ch.rate * Complex64::from_polar(1.0, -nu * ch.delta);
    }
    out
}
