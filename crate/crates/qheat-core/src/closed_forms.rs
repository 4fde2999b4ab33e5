//! Closed forms for the two exactly solvable corners: longitudinal (sigma_z)
//! coupling, where only the k = 0 Rabi sideband survives, and the undriven
//! qubit. Both double as oracles for the full pipeline.

use num_complex::Complex64;

use crate::bath::{spectral_s, BathParameters};
use crate::error::{Error, Result};
use crate::floquet::InitialState;
use crate::heat::{HeatAtom, HeatDistribution};
use crate::linalg::Matrix2;
use crate::rates::RateTable;

/// The two longitudinal jump rates. `gamma_minus` emits Omega_R into the
/// bath (mode 2 -> 1), `gamma_plus` absorbs it (1 -> 2); detailed balance
/// fixes gamma_minus / gamma_plus = e^{beta Omega_R}.
#[derive(Debug, Clone, Copy)]
pub struct LongitudinalRates {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub omega_r: f64,
    pub omega_drive: f64,
}

impl LongitudinalRates {
    pub fn total(&self) -> f64 {
        self.gamma_plus + self.gamma_minus
    }

    /// Rates straight from the mixing angle: |S_{12,0}| = sin 2 theta, so
    /// Gamma_{+-} = 2 pi s(+-Omega_R) sin^2 2 theta.
    pub fn from_mixing(
        theta: f64,
        omega_r: f64,
        omega_drive: f64,
        bath: &BathParameters,
    ) -> Result<Self> {
        if !(omega_r > 0.0) || !(omega_drive > 0.0) {
            return Err(Error::Domain(format!(
                "longitudinal rates need positive frequencies, got Omega_R = {omega_r}, Omega = {omega_drive}"
            )));
        }
        let amp_sq = (2.0 * theta).sin().powi(2);
        Ok(Self {
            gamma_plus: 2.0 * std::f64::consts::PI * spectral_s(omega_r, bath) * amp_sq,
            gamma_minus: 2.0 * std::f64::consts::PI * spectral_s(-omega_r, bath) * amp_sq,
            omega_r,
            omega_drive,
        })
    }

    /// Reads the rates off a longitudinal rate table. Errors if the table
    /// carries off-diagonal weight outside the k = 0 sideband.
    pub fn from_table(table: &RateTable) -> Result<Self> {
        for ch in &table.channels {
            if ch.alpha != ch.beta && ch.k != 0 && ch.rate > 0.0 {
                return Err(Error::Domain(format!(
                    "table is not longitudinal: channel ({}, {}, k = {}) has rate {}",
                    ch.alpha + 1,
                    ch.beta + 1,
                    ch.k,
                    ch.rate
                )));
            }
        }
        Ok(Self {
            gamma_plus: table.totals[1][0],
            gamma_minus: table.totals[0][1],
            omega_r: table.omega_r,
            omega_drive: table.omega_drive,
        })
    }
}

/// Tilted generator of the longitudinal problem,
/// [[-Gamma_+, Gamma_- e^{+i Omega_R nu}], [Gamma_+ e^{-i Omega_R nu}, -Gamma_-]].
pub fn longitudinal_generator(rates: &LongitudinalRates, nu: f64) -> Matrix2 {
    let phase = rates.omega_r * nu;
    [
        [
            Complex64::new(-rates.gamma_plus, 0.0),
            rates.gamma_minus * Complex64::from_polar(1.0, phase),
        ],
        [
            rates.gamma_plus * Complex64::from_polar(1.0, -phase),
            Complex64::new(-rates.gamma_minus, 0.0),
        ],
    ]
}

fn checked_total(rates: &LongitudinalRates) -> Result<f64> {
    let total = rates.total();
    if !(total > 0.0) {
        return Err(Error::Domain(format!(
            "longitudinal rates vanish (Gamma = {total}); no relaxation to count"
        )));
    }
    Ok(total)
}

/// Exact longitudinal characteristic function: a single exchanged quantum
/// per relaxation event gives four terms,
///
///   G = (G+/G) p1 (1 - e^{-G t}) e^{-i Omega_R nu}
///     + (G-/G) p2 (1 - e^{-G t}) e^{+i Omega_R nu}
///     + (G+/G) (p2 + p1 e^{-G t}) + (G-/G) (p1 + p2 e^{-G t}).
pub fn sigma_z_cf(
    rates: &LongitudinalRates,
    init: &InitialState,
    nu: f64,
    t: f64,
) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be nonnegative")));
    }
    let total = checked_total(rates)?;
    let wp = rates.gamma_plus / total;
    let wm = rates.gamma_minus / total;
    let decay = (-total * t).exp();
    let (p1, p2) = (init.p[0], init.p[1]);
    let up = Complex64::from_polar(1.0, rates.omega_r * nu);
    let down = up.conj();
    Ok(wp * p1 * (1.0 - decay) * down
        + wm * p2 * (1.0 - decay) * up
        + Complex64::new(wp * (p2 + p1 * decay) + wm * (p1 + p2 * decay), 0.0))
}

/// The three-atom longitudinal heat distribution: at most one quantum
/// +-Omega_R is ever exchanged.
pub fn sigma_z_pdf(
    rates: &LongitudinalRates,
    init: &InitialState,
    t: f64,
) -> Result<HeatDistribution> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be nonnegative")));
    }
    let total = checked_total(rates)?;
    let decay = (-total * t).exp();
    let p_down = rates.gamma_minus / total * init.p[1] * (1.0 - decay);
    let p_up = rates.gamma_plus / total * init.p[0] * (1.0 - decay);
    let p_zero = (1.0 - p_down - p_up).max(0.0);
    Ok(HeatDistribution {
        atoms: vec![
            HeatAtom {
                n: 0,
                m: -1,
                w: p_up,
            },
            HeatAtom {
                n: 0,
                m: 0,
                w: p_zero,
            },
            HeatAtom {
                n: 0,
                m: 1,
                w: p_down,
            },
        ],
        t,
        omega_drive: rates.omega_drive,
        omega_r: rates.omega_r,
        envelope: None,
    })
}

/// k-th raw heat moment of the longitudinal distribution,
/// <Q^k> = Omega_R^k [p_down + (-1)^k p_up] for k >= 1.
pub fn sigma_z_moment(
    rates: &LongitudinalRates,
    init: &InitialState,
    t: f64,
    k: u32,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("moment order k must be >= 1".into()));
    }
    let dist = sigma_z_pdf(rates, init, t)?;
    let (p_up, p_down) = (dist.atoms[0].w, dist.atoms[2].w);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(rates.omega_r.powi(k as i32) * (p_down + sign * p_up))
}

/// Transverse-coupled qubit without a drive: the same two-rate structure
/// with the bare splitting omega in place of Omega_R and unit matrix
/// element, Gamma_{+-} = 2 pi s(+-omega).
pub fn undriven_rates(omega: f64, bath: &BathParameters) -> Result<LongitudinalRates> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "undriven qubit needs omega > 0, got {omega}"
        )));
    }
    Ok(LongitudinalRates {
        gamma_plus: 2.0 * std::f64::consts::PI * spectral_s(omega, bath),
        gamma_minus: 2.0 * std::f64::consts::PI * spectral_s(-omega, bath),
        omega_r: omega,
        omega_drive: omega,
    })
}

/// Tilted generator of the undriven qubit.
pub fn undriven_generator(omega: f64, bath: &BathParameters, nu: f64) -> Result<Matrix2> {
    Ok(longitudinal_generator(&undriven_rates(omega, bath)?, nu))
}

/// Gibbs populations of the bare qubit H = diag(0, omega).
pub fn gibbs_populations(omega: f64, bath: &BathParameters) -> [f64; 2] {
    let x = (-bath.beta * omega).exp();
    [1.0 / (1.0 + x), x / (1.0 + x)]
}
