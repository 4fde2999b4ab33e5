//! Ohmic bath: spectral density, Bose occupation and the one-sided rate
//! kernel s(E) that feeds every golden-rule rate downstream.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Ohmic environment, J(omega) = eta * omega at inverse temperature beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParameters {
    /// Dimensionless coupling strength eta.
    pub eta: f64,
    /// Inverse temperature beta = 1 / (k_B T).
    pub beta: f64,
}

impl BathParameters {
    pub fn new(eta: f64, beta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::Domain(format!(
                "bath coupling eta = {eta} must be positive"
            )));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "inverse temperature beta = {beta} must be positive"
            )));
        }
        Ok(Self { eta, beta })
    }

    pub fn from_temperature(eta: f64, kt: f64) -> Result<Self> {
        if !(kt > 0.0) || !kt.is_finite() {
            return Err(Error::Domain(format!(
                "temperature k_B T = {kt} must be positive"
            )));
        }
        Self::new(eta, 1.0 / kt)
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }
}

/// Ohmic spectral density J(omega) = eta * omega, defined for omega >= 0.
pub fn spectral_density(omega: f64, bath: &BathParameters) -> f64 {
    debug_assert!(
        omega >= 0.0,
        "spectral density takes nonnegative frequencies"
    );
    bath.eta * omega
}

/// Bose-Einstein occupation 1 / (e^{beta E} - 1) for E > 0.
pub fn bose_occupation(energy: f64, bath: &BathParameters) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(Error::Domain(format!(
            "Bose occupation needs a positive energy, got {energy}"
        )));
    }
    Ok(1.0 / (bath.beta * energy).exp_m1())
}

/// One-sided rate kernel:
///
///   s(E) = J(E) n_B(E)            for E > 0   (absorption from the bath)
///        = J(-E) [n_B(-E) + 1]    for E < 0   (emission into the bath)
///        = eta / beta             at E = 0    (continuous limit)
///
/// Detailed balance s(E) e^{beta E} = s(-E) holds identically.
pub fn spectral_s(energy: f64, bath: &BathParameters) -> f64 {
    if energy == 0.0 {
        bath.eta / bath.beta
    } else if energy > 0.0 {
        // eta E n_B(E); the expm1 form stays accurate for beta E << 1 and
        // underflows cleanly to 0 for beta E >> 1.
        bath.eta * energy / (bath.beta * energy).exp_m1()
    } else {
        let e = -energy;
        bath.eta * e * (1.0 / (bath.beta * e).exp_m1() + 1.0)
    }
}

/// Branch selector for the half-line correlation integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Half-line bath correlation integral
/// I_plus(nu, E) = pi e^{+i E nu} s(+E),  I_minus(nu, E) = pi e^{-i E nu} s(-E).
pub fn correlation_integral(
    branch: Branch,
    nu: f64,
    energy: f64,
    bath: &BathParameters,
) -> Complex64 {
    let sign = match branch {
        Branch::Plus => 1.0,
        Branch::Minus => -1.0,
    };
    PI * spectral_s(sign * energy, bath) * Complex64::from_polar(1.0, sign * energy * nu)
}
