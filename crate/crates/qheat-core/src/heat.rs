//! Heat statistics: mean power, long-time cumulants from the dominant
//! eigenvalue, the Gaussian-comb asymptotics and the exact finite-time
//! inversion of the characteristic function on the {n Omega + m Omega_R}
//! lattice.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::floquet::InitialState;
use crate::rates::RateTable;
use crate::tilted::{dss, nu_aggregates};

/// First three heat cumulants at a fixed time, plus their per-time rates.
/// `skewness` is the third cumulant, not the standardized ratio. Orders above
/// the one requested are left as `None`.
#[derive(Debug, Clone, Copy)]
pub struct CumulantSet {
    pub t: f64,
    pub mean: f64,
    pub variance: Option<f64>,
    pub skewness: Option<f64>,
    pub mean_rate: f64,
    pub variance_rate: Option<f64>,
    pub skewness_rate: Option<f64>,
}

/// One delta atom of the heat distribution at Q = n Omega + m Omega_R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatAtom {
    pub n: i64,
    pub m: i8,
    pub w: f64,
}

/// Atomic heat distribution on the drive-photon lattice.
#[derive(Debug, Clone)]
pub struct HeatDistribution {
    /// Atoms sorted by (n, m); weights nonnegative.
    pub atoms: Vec<HeatAtom>,
    pub t: f64,
    pub omega_drive: f64,
    pub omega_r: f64,
    /// Gaussian-envelope coefficients (a, b) when the distribution came from
    /// the long-time asymptotics.
    pub envelope: Option<(f64, f64)>,
}

impl HeatDistribution {
    pub fn heat_of(&self, atom: &HeatAtom) -> f64 {
        atom.n as f64 * self.omega_drive + atom.m as f64 * self.omega_r
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.w * self.heat_of(a)).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.atoms
            .iter()
            .map(|a| {
                let d = self.heat_of(a) - mean;
                a.w * d * d
            })
            .sum()
    }

    pub fn weight(&self, n: i64, m: i8) -> f64 {
        self.atoms
            .iter()
            .find(|a| a.n == n && a.m == m)
            .map_or(0.0, |a| a.w)
    }
}

/// Instantaneous mean heat current into the bath at fixed populations:
/// <Q_dot> = -sum_channels Delta a_{alpha beta, k} p_beta.
pub fn mean_heat_power(table: &RateTable, pops: &InitialState) -> f64 {
    table
        .channels
        .iter()
        .map(|ch| -ch.delta * ch.rate * pops.p[ch.beta])
        .sum()
}

/// Exact time-integrated mean heat along the zero-field relaxation:
/// the power is linear in the populations and the populations relax
/// exponentially, so the integral is closed-form.
pub fn integrated_mean_heat(table: &RateTable, init: &InitialState, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be nonnegative")));
    }
    let sigma = table.sigma();
    let integrated_pops = if sigma == 0.0 {
        [init.p[0] * t, init.p[1] * t]
    } else {
        let st = dss(table)?;
        let relax = (1.0 - (-sigma * t).exp()) / sigma;
        [
            st.p[0] * t + (init.p[0] - st.p[0]) * relax,
            st.p[1] * t + (init.p[1] - st.p[1]) * relax,
        ]
    };
    Ok(table
        .channels
        .iter()
        .map(|ch| -ch.delta * ch.rate * integrated_pops[ch.beta])
        .sum())
}

/// True once t is comfortably beyond the relaxation time 1/Sigma, the regime
/// the long-time cumulant and comb formulas assume.
pub fn longtime_valid(table: &RateTable, t: f64) -> bool {
    t * table.sigma() >= 10.0
}

/// xi_plus for |nu| << tau: the principal square root stays on the +Sigma
/// branch there, no continuation needed.
fn xi_plus_near_zero(table: &RateTable, nu: f64) -> Complex64 {
    let agg = nu_aggregates(table, nu);
    0.5 * (agg.r + agg.h2.sqrt())
}

/// Richardson ladder over central differences D(h0 / 2^i); returns the best
/// extrapolant and its error estimate.
fn richardson(samples: &[Complex64]) -> (Complex64, f64) {
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(samples.len());
    let mut best = samples[0];
    let mut best_err = f64::INFINITY;
    for (i, &s) in samples.iter().enumerate() {
        let mut row = vec![s];
        for j in 1..=i {
            let p = 4f64.powi(j as i32);
            let val = (p * row[j - 1] - rows[i - 1][j - 1]) / (p - 1.0);
            row.push(val);
        }
        if i > 0 {
            let err = (row[i] - rows[i - 1][i - 1]).norm();
            if err < best_err {
                best_err = err;
                best = row[i];
            }
        }
        rows.push(row);
    }
    (best, best_err)
}

/// First cumulant rates from the dominant eigenvalue:
/// <<Q^n>> = (-i)^n d^n xi_plus / d nu^n |_{nu = 0} * t.
///
/// Derivatives come from central differences with a Richardson ladder
/// starting at nu_0 = 1e-3 tau. Valid as a distribution statement only for
/// t >> 1 / Sigma (see `longtime_valid`); the rates themselves are
/// time-independent.
pub fn longtime_cumulants(table: &RateTable, t: f64, order: usize) -> Result<CumulantSet> {
    if !(1..=3).contains(&order) {
        return Err(Error::Domain(format!(
            "cumulant order {order} not in 1..=3"
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be nonnegative")));
    }
    let sigma = table.sigma();
    if sigma <= 0.0 {
        return Err(Error::DegenerateGenerator);
    }
    let tau = table.tau();
    let h0 = 1e-3 * tau;
    let levels = 6usize;
    let f = |nu: f64| xi_plus_near_zero(table, nu);

    let mut rates = [0.0f64; 3];
    for n in 1..=order {
        let mut samples = Vec::with_capacity(levels);
        for i in 0..levels {
            let h = h0 / 2f64.powi(i as i32);
            let d = match n {
                1 => (f(h) - f(-h)) / (2.0 * h),
                2 => (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h),
                _ => (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h),
            };
            samples.push(d);
        }
        let (best, err) = richardson(&samples);
        let scale = sigma * table.omega_drive.powi(n as i32 - 1);
        if err > (1e-8 * best.norm()).max(1e-13 * scale) {
            return Err(Error::DifferentiationFailure {
                order: n,
                best_error: err,
                scale,
            });
        }
        // (-i)^n picks out the real cumulant; the imaginary residue must be
        // noise (hermiticity of G makes odd derivatives imaginary and even
        // ones real).
        let c = Complex64::new(0.0, -1.0).powu(n as u32) * best;
        if c.im.abs() > 1e-10 * c.re.abs().max(scale) {
            return Err(Error::DifferentiationFailure {
                order: n,
                best_error: c.im.abs(),
                scale,
            });
        }
        rates[n - 1] = c.re;
    }

    Ok(CumulantSet {
        t,
        mean: rates[0] * t,
        variance: (order >= 2).then_some(rates[1] * t),
        skewness: (order >= 3).then_some(rates[2] * t),
        mean_rate: rates[0],
        variance_rate: (order >= 2).then_some(rates[1]),
        skewness_rate: (order >= 3).then_some(rates[2]),
    })
}

/// Envelope coefficients a = <<Q>>_rate / Omega and b = <<Q^2>>_rate / (2 Omega^2).
pub fn envelope_coefficients(table: &RateTable) -> Result<(f64, f64)> {
    let cum = longtime_cumulants(table, 1.0, 2)?;
    let omega = table.omega_drive;
    let a = cum.mean_rate / omega;
    let b = cum.variance_rate.unwrap() / (2.0 * omega * omega);
    if b <= 0.0 {
        return Err(Error::InvalidExpansion { b });
    }
    Ok((a, b))
}

/// Long-time Gaussian envelope of the heat distribution,
///
///   w(Q, t) = exp(-(Q - a t Omega)^2 / (4 b t Omega^2)) / (sqrt(2 pi) sqrt(2 b t) Omega),
///
/// a unit-mass Gaussian with mean a t Omega and variance 2 b t Omega^2.
pub fn gaussian_envelope(q: f64, t: f64, table: &RateTable) -> Result<f64> {
    let (a, b) = envelope_coefficients(table)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("envelope needs t > 0, got {t}")));
    }
    let omega = table.omega_drive;
    Ok(envelope_density(q, t, a, b, omega))
}

fn envelope_density(q: f64, t: f64, a: f64, b: f64, omega: f64) -> f64 {
    let var = 2.0 * b * t * omega * omega;
    let d = q - a * t * omega;
    (-d * d / (2.0 * var)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * var.sqrt())
}

/// Long-time Dirac-comb asymptotics: three interleaved combs with spacing
/// Omega, offsets m Omega_R, branch masses
///
///   p_down = A12 p2(0) / Sigma  (m = +1),  p_up = A21 p1(0) / Sigma  (m = -1),
///   p_0 = 1 - p_down - p_up     (m = 0),
///
/// each weighted by the Gaussian envelope: w(n, m) = Omega w(n Omega + m Omega_R, t) p_m.
///
/// `n_range` is the window half-width in drive quanta around the mean;
/// defaults to ceil((|mean| + 8 sigma) / Omega). Unit mass within 1e-8 is
/// enforced, not repaired.
pub fn longtime_pdf(
    table: &RateTable,
    init: &InitialState,
    t: f64,
    n_range: Option<u32>,
) -> Result<HeatDistribution> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "long-time comb needs t > 0, got {t}"
        )));
    }
    let (a, b) = envelope_coefficients(table)?;
    let sigma = table.sigma();
    let omega = table.omega_drive;
    let q_mean = a * t * omega;
    let sd = (2.0 * b * t).sqrt() * omega;

    let p_down = table.totals[0][1] * init.p[1] / sigma;
    let p_up = table.totals[1][0] * init.p[0] / sigma;
    let p_zero = (1.0 - p_down - p_up).max(0.0);

    let nc = (q_mean / omega).round() as i64;
    let half = match n_range {
        Some(v) => v as i64,
        None => ((q_mean.abs() + 8.0 * sd) / omega).ceil() as i64,
    };

    let mut atoms = Vec::new();
    let mut total = 0.0f64;
    for n in (nc - half)..=(nc + half) {
        for (m, pm) in [(-1i8, p_up), (0, p_zero), (1, p_down)] {
            let q = n as f64 * omega + m as f64 * table.omega_r;
            let w = omega * envelope_density(q, t, a, b, omega) * pm;
            total += w;
            if w > 1e-300 {
                atoms.push(HeatAtom { n, m, w });
            }
        }
    }
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::MassDeficit { total });
    }
    Ok(HeatDistribution {
        atoms,
        t,
        omega_drive: omega,
        omega_r: table.omega_r,
        envelope: Some((a, b)),
    })
}

/// Exact finite-time heat distribution by inverting the characteristic
/// function over one counting-field period.
///
/// G(nu, t) splits into three tau-periodic pieces,
///
///   G = Phi_0(nu) + e^{+i Omega_R nu} Phi_{+1}(nu) + e^{-i Omega_R nu} Phi_{-1}(nu),
///
/// whose Fourier coefficients on nu_j = j tau / M are exactly the lattice
/// weights w_{n, m}. The m = +1 comb carries the downward-jump mass (heat
/// n Omega + Omega_R), m = -1 the upward one. `grid` is M, a power of
/// two of at least 256; weights must come out real within 1e-10 and sum
/// to 1 within 1e-8 (then renormalized; sub-roundoff atoms below 1e-15
/// are dropped).
pub fn finite_time_pdf(
    table: &RateTable,
    init: &InitialState,
    t: f64,
    grid: usize,
) -> Result<HeatDistribution> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be nonnegative")));
    }
    if !grid.is_power_of_two() || grid < 256 {
        return Err(Error::Domain(format!(
            "inversion grid {grid} must be a power of two >= 256"
        )));
    }
    let m_grid = grid;
    let omega = table.omega_drive;
    let tot = &table.totals;
    let sigma = table.sigma();
    let (a12, a21) = (tot[0][1], tot[1][0]);
    let z0 = init.p[1] - init.p[0];

    // Per-harmonic rates by channel class; diagonal channels enter through
    // the Y terms, off-diagonal ones through the periodic parts f, g of
    // A12^nu = e^{+i Omega_R nu} f, A21^nu = e^{-i Omega_R nu} g.
    let mut f_ch: Vec<(i64, f64)> = Vec::new();
    let mut g_ch: Vec<(i64, f64)> = Vec::new();
    let mut d1_ch: Vec<(i64, f64)> = Vec::new();
    let mut d2_ch: Vec<(i64, f64)> = Vec::new();
    for ch in &table.channels {
        let dst = match (ch.alpha, ch.beta) {
            (0, 1) => &mut f_ch,
            (1, 0) => &mut g_ch,
            (0, 0) => &mut d1_ch,
            _ => &mut d2_ch,
        };
        dst.push((ch.k, ch.rate));
    }

    let mut phi_zero = vec![Complex64::new(0.0, 0.0); m_grid];
    let mut phi_plus = phi_zero.clone();
    let mut phi_minus = phi_zero.clone();
    for j in 0..m_grid {
        // e^{-i nu k Omega} at nu_j = j tau / M is the exact root of unity.
        let harmonic = |channels: &[(i64, f64)]| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(k, rate) in channels {
                let idx = (j as i64 * k).rem_euclid(m_grid as i64);
                let angle = -2.0 * std::f64::consts::PI * idx as f64 / m_grid as f64;
                acc += rate * Complex64::from_polar(1.0, angle);
            }
            acc
        };
        let f = harmonic(&f_ch);
        let g = harmonic(&g_ch);
        let ups11 = harmonic(&d1_ch) - Complex64::new(tot[0][0], 0.0);
        let ups22 = harmonic(&d2_ch) - Complex64::new(tot[1][1], 0.0);
        // Phase-cancelled invariants keep every sample exactly tau-periodic.
        let r = ups11 + ups22 - sigma;
        let h2 = sigma * sigma + 4.0 * (f * g - a12 * a21);
        let h = h2.sqrt();
        let rho = 0.5 * r * t;
        let x = 0.5 * h * t;
        let e_plus = (rho + x).exp();
        let e_minus = (rho - x).exp();
        let cosh_term = 0.5 * (e_plus + e_minus);
        let tfac = if x.norm() < 1e-3 {
            let x2 = x * x;
            t * rho.exp() * (Complex64::new(1.0, 0.0) + x2 / 6.0 + x2 * x2 / 120.0)
        } else {
            (e_plus - e_minus) / h
        };
        phi_zero[j] = cosh_term + (a21 - a12) * (0.5 * z0) * tfac;
        phi_plus[j] = f * init.p[1] * tfac;
        phi_minus[j] = g * init.p[0] * tfac;
    }

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m_grid);
    fft.process(&mut phi_zero);
    fft.process(&mut phi_plus);
    fft.process(&mut phi_minus);

    // Center the aliasing window on the exact mean heat.
    let nc = (integrated_mean_heat(table, init, t)? / omega).round() as i64;

    let mut atoms = Vec::new();
    let mut worst = 0.0f64;
    let mut total = 0.0f64;
    for (m_label, buf) in [(0i8, &phi_zero), (1, &phi_plus), (-1, &phi_minus)] {
        for (idx, val) in buf.iter().enumerate() {
            let w = val / m_grid as f64;
            worst = worst.max(w.im.abs()).max((-w.re).max(0.0));
            let shift = ((nc - idx as i64) as f64 / m_grid as f64).round() as i64;
            let n = idx as i64 + m_grid as i64 * shift;
            let clipped = w.re.max(0.0);
            total += clipped;
            if clipped > 0.0 {
                atoms.push(HeatAtom {
                    n,
                    m: m_label,
                    w: clipped,
                });
            }
        }
    }
    if worst > 1e-10 {
        return Err(Error::DecompositionFailure { max_imag: worst });
    }
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Resolution { total });
    }
    let mut atoms: Vec<HeatAtom> = atoms
        .into_iter()
        .filter_map(|a| {
            let w = a.w / total;
            (w > 1e-15).then_some(HeatAtom { w, ..a })
        })
        .collect();
    atoms.sort_by_key(|a| (a.n, a.m));

    Ok(HeatDistribution {
        atoms,
        t,
        omega_drive: omega,
        omega_r: table.omega_r,
        envelope: None,
    })
}
