//! The counting-field-tilted population master equation: generator assembly,
//! spectral decomposition, the characteristic function of exchanged heat and
//! the zero-field (physical) dynamics.
//!
//! Conventions: G(nu, t) = <e^{i nu Q}> with Q > 0 for heat delivered to the
//! bath; populations are ordered (mode 1, mode 2) with eps2 - eps1 = Omega_R.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::floquet::InitialState;
use crate::linalg::Matrix2;
use crate::rates::{aggregate_nu, RateTable};

/// Tilted generator at a fixed counting field,
///
///   A(nu) = [[A11^nu - A11 - A21, A12^nu], [A21^nu, A22^nu - A22 - A12]].
///
/// At nu = 0 the columns sum to zero and the off-diagonals are the plain
/// relaxation rates.
#[derive(Debug, Clone)]
pub struct GeneralizedRateMatrix {
    pub nu: f64,
    pub matrix: Matrix2,
}

pub fn tilted_generator(table: &RateTable, nu: f64) -> GeneralizedRateMatrix {
    let a = aggregate_nu(table, nu);
    let t = &table.totals;
    let matrix = [
        [a[0][0] - t[0][0] - t[1][0], a[0][1]],
        [a[1][0], a[1][1] - t[1][1] - t[0][1]],
    ];
    GeneralizedRateMatrix { nu, matrix }
}

/// The scalar invariants of the tilted generator that every closed-form
/// evaluation runs on: Sigma, r = -Sigma + Y11 + Y22 and
/// h^2 = Sigma^2 + 4 (A12^nu A21^nu - A12 A21).
pub(crate) struct NuAggregates {
    pub a: Matrix2,
    pub sigma: f64,
    pub r: Complex64,
    pub h2: Complex64,
}

pub(crate) fn nu_aggregates(table: &RateTable, nu: f64) -> NuAggregates {
    let a = aggregate_nu(table, nu);
    let t = &table.totals;
    let sigma = t[0][1] + t[1][0];
    let ups11 = a[0][0] - t[0][0];
    let ups22 = a[1][1] - t[1][1];
    let ups12_sq = a[0][1] * a[1][0] - t[0][1] * t[1][0];
    NuAggregates {
        a,
        sigma,
        r: ups11 + ups22 - sigma,
        h2: sigma * sigma + 4.0 * ups12_sq,
    }
}

/// Eigenstructure of the tilted generator at one counting field.
///
/// xi_plus is the branch that vanishes at nu = 0 (the cumulant-generating
/// eigenvalue); h is sqrt(Sigma^2 + 4 Y12^(2)) continued from h(0) = +Sigma
/// along the counting-field axis, so xi_plus/xi_minus never swap branches.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub nu: f64,
    pub xi_minus: Complex64,
    pub xi_plus: Complex64,
    pub v_minus: [Complex64; 2],
    pub v_plus: [Complex64; 2],
    pub c_minus: Complex64,
    pub c_plus: Complex64,
    pub h: Complex64,
    pub r: Complex64,
    pub sigma: f64,
    /// Set when |h| is so small the two branches are effectively defective;
    /// the decomposition is still returned but c's may be large.
    pub near_defective: bool,
}

/// Continues h(nu) = sqrt(h^2(nu)) from h(0) = +Sigma.
///
/// h^2 is tau-periodic, so the walk runs over the reduced field in
/// [-tau/2, tau/2] with adaptive refinement; the principal square root at the
/// actual nu is then aligned with the tracked endpoint.
fn tracked_h(table: &RateTable, nu: f64, h2_at_nu: Complex64, sigma: f64) -> Complex64 {
    let tau = table.tau();
    let nu_red = nu - tau * (nu / tau).round();
    let principal = h2_at_nu.sqrt();
    if nu_red == 0.0 {
        // On the lattice nu = n tau, h^2 = Sigma^2 up to roundoff; the
        // principal root already matches the +Sigma branch.
        return principal;
    }
    let mut steps = 64usize;
    let endpoint = loop {
        let mut h_prev = Complex64::new(sigma, 0.0);
        let mut ok = true;
        for i in 1..=steps {
            let x = nu_red * i as f64 / steps as f64;
            let mut h_i = nu_aggregates(table, x).h2.sqrt();
            if (h_i + h_prev).norm() < (h_i - h_prev).norm() {
                h_i = -h_i;
            }
            if (h_i - h_prev).norm() > 0.5 * (h_i.norm() + h_prev.norm()) + 1e-12 * sigma {
                ok = false;
                break;
            }
            h_prev = h_i;
        }
        if ok || steps >= 8192 {
            break h_prev;
        }
        steps *= 2;
    };
    if (principal - endpoint).norm() <= (-principal - endpoint).norm() {
        principal
    } else {
        -principal
    }
}

pub fn spectral_decompose(
    table: &RateTable,
    nu: f64,
    init: &InitialState,
) -> Result<SpectralDecomposition> {
    let agg = nu_aggregates(table, nu);
    if agg.sigma <= 0.0 {
        return Err(Error::DegenerateGenerator);
    }
    let h = tracked_h(table, nu, agg.h2, agg.sigma);
    let near_defective = h.norm() < 1e-12 * agg.sigma;
    let xi_minus = 0.5 * (agg.r - h);
    let xi_plus = 0.5 * (agg.r + h);

    let t = &table.totals;
    let a12_minus_a21 = Complex64::new(t[0][1] - t[1][0], 0.0);
    let gen = tilted_generator(table, nu).matrix;

    let eigvec = |sign: f64, xi: Complex64| -> [Complex64; 2] {
        let raw = [a12_minus_a21 + sign * h, 2.0 * agg.a[1][0]];
        let trace = raw[0] + raw[1];
        if trace.norm() > 1e-10 * agg.sigma {
            return [raw[0] / trace, raw[1] / trace];
        }
        // Trace normalization degenerates (the nu = 0 decaying mode is
        // traceless); fall back to a 2-norm-normalized nullspace vector.
        let m = [[gen[0][0] - xi, gen[0][1]], [gen[1][0], gen[1][1] - xi]];
        let cand_a = [m[0][1], -m[0][0]];
        let cand_b = [m[1][1], -m[1][0]];
        let norm_a = (cand_a[0].norm_sqr() + cand_a[1].norm_sqr()).sqrt();
        let norm_b = (cand_b[0].norm_sqr() + cand_b[1].norm_sqr()).sqrt();
        let (mut v, n) = if norm_a >= norm_b {
            (cand_a, norm_a)
        } else {
            (cand_b, norm_b)
        };
        if n < 1e-300 {
            return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        }
        v[0] /= n;
        v[1] /= n;
        let idx = if v[0].norm() >= v[1].norm() { 0 } else { 1 };
        let phase = Complex64::from_polar(1.0, -v[idx].arg());
        [v[0] * phase, v[1] * phase]
    };

    let v_minus = eigvec(-1.0, xi_minus);
    let v_plus = eigvec(1.0, xi_plus);

    let det = v_minus[0] * v_plus[1] - v_minus[1] * v_plus[0];
    if det.norm() < 1e-300 {
        return Err(Error::Domain(
            "defective tilted generator: eigenvector matrix singular".into(),
        ));
    }
    let p1 = Complex64::new(init.p[0], 0.0);
    let p2 = Complex64::new(init.p[1], 0.0);
    let c_minus = (p1 * v_plus[1] - p2 * v_plus[0]) / det;
    let c_plus = (p2 * v_minus[0] - p1 * v_minus[1]) / det;

    Ok(SpectralDecomposition {
        nu,
        xi_minus,
        xi_plus,
        v_minus,
        v_plus,
        c_minus,
        c_plus,
        h,
        r: agg.r,
        sigma: agg.sigma,
        near_defective,
    })
}

/// Characteristic function G(nu, t) = <e^{i nu Q}>.
///
/// Evaluated in the branch-free form
///
///   G = e^{r t / 2} [cosh(h t / 2) + K t sinhc(h t / 2)],
///   K = (A21 - A12) z / 2 + A12^nu p2 + A21^nu p1,  z = p2 - p1,
///
/// which is invariant under h -> -h, so no eigenvalue continuation is needed.
/// The exponentials are paired as e^{xi t} terms to stay bounded for any t.
pub fn characteristic_function(
    table: &RateTable,
    init: &InitialState,
    nu: f64,
    t: f64,
) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be nonnegative")));
    }
    let agg = nu_aggregates(table, nu);
    let z = init.p[1] - init.p[0];
    let tot = &table.totals;
    let k_coef = Complex64::new(0.5 * (tot[1][0] - tot[0][1]) * z, 0.0)
        + agg.a[0][1] * init.p[1]
        + agg.a[1][0] * init.p[0];
    let h = agg.h2.sqrt();
    let rho = 0.5 * agg.r * t;
    let x = 0.5 * h * t;
    let e_plus = (rho + x).exp();
    let e_minus = (rho - x).exp();
    let cosh_term = 0.5 * (e_plus + e_minus);
    let sinh_term = if x.norm() < 1e-3 {
        let x2 = x * x;
        t * rho.exp() * (Complex64::new(1.0, 0.0) + x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        (e_plus - e_minus) / h
    };
    Ok(cosh_term + k_coef * sinh_term)
}

/// Dynamic steady state (A12, A21) / Sigma of the zero-field master equation.
pub fn dss(table: &RateTable) -> Result<InitialState> {
    let sigma = table.sigma();
    if sigma <= 0.0 {
        return Err(Error::DegenerateGenerator);
    }
    let p1 = table.totals[0][1] / sigma;
    let p2 = table.totals[1][0] / sigma;
    let total = p1 + p2;
    Ok(InitialState {
        p: [p1 / total, p2 / total],
    })
}

/// Exact zero-field relaxation: p(t) = p_dss + (p(0) - p_dss) e^{-Sigma t}.
pub fn propagate_populations(
    table: &RateTable,
    init: &InitialState,
    t: f64,
) -> Result<InitialState> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be nonnegative")));
    }
    let sigma = table.sigma();
    if sigma == 0.0 {
        return Ok(*init);
    }
    let st = dss(table)?;
    let decay = (-sigma * t).exp();
    let p1 = (st.p[0] + (init.p[0] - st.p[0]) * decay).clamp(0.0, 1.0);
    Ok(InitialState { p: [p1, 1.0 - p1] })
}
