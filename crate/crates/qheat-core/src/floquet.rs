//! Floquet modes and quasienergies of the driven two-level system, either
//! from the rotating-frame closed form (Rabi problem) or from the one-period
//! monodromy propagator for an arbitrary periodic 2x2 Hamiltonian.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{commutator, dot, expm2, matmul, matvec, norm_vec, Matrix2, ZERO};

/// Default number of mode samples per drive period.
pub const DEFAULT_MODE_GRID: usize = 512;

/// Total Magnus substeps per period used by the monodromy integrator,
/// regardless of the requested sample grid.
const MAGNUS_SUBSTEPS: usize = 16384;

/// Driven two-level system in the bare basis (|0>, |1>), |1> excited:
///
///   H(t) = [[0, g e^{+i(Omega t - phi)}], [g e^{-i(Omega t - phi)}, omega]].
///
/// The detuning is stored as Delta = omega - Omega.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiParameters {
    /// Bare level splitting omega.
    pub omega: f64,
    /// Drive amplitude g >= 0.
    pub g: f64,
    /// Drive frequency Omega > 0.
    pub omega_drive: f64,
    /// Drive phase phi.
    pub phi: f64,
}

impl RabiParameters {
    /// Detuning Delta = omega - Omega.
    pub fn detuning(&self) -> f64 {
        self.omega - self.omega_drive
    }

    /// Generalized Rabi frequency sqrt(Delta^2 + 4 g^2).
    pub fn rabi_frequency(&self) -> f64 {
        let d = self.detuning();
        (d * d + 4.0 * self.g * self.g).sqrt()
    }

    /// Drive period tau = 2 pi / Omega.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_drive
    }

    /// Lab-frame Hamiltonian at time t.
    pub fn hamiltonian(&self, t: f64) -> Matrix2 {
        let ph = Complex64::from_polar(self.g, self.omega_drive * t - self.phi);
        [[ZERO, ph], [ph.conj(), Complex64::new(self.omega, 0.0)]]
    }
}

/// Floquet modes sampled over one period together with their quasienergies.
///
/// Mode samples are indexed `[j][mode][component]` on the uniform grid
/// t_j = j tau / n, j = 0..=n (the endpoint repeats the start within
/// roundoff). Quasienergies satisfy eps2 - eps1 = omega_r > 0.
#[derive(Debug, Clone)]
pub struct FloquetSolution {
    pub omega_drive: f64,
    /// Drive phase carried through for the bare-state projection formulas;
    /// monodromy-built solutions set it to 0.
    pub phi: f64,
    pub quasienergies: [f64; 2],
    /// Quasienergy gap eps2 - eps1.
    pub omega_r: f64,
    /// Mixing angle in [0, pi/2]; for generic Hamiltonians it is inferred
    /// from the t = 0 mode amplitudes.
    pub theta: f64,
    pub mode_samples: Vec<[[Complex64; 2]; 2]>,
}

impl FloquetSolution {
    pub fn tau(&self) -> f64 {
        2.0 * PI / self.omega_drive
    }

    /// Number of grid intervals per period (samples run 0..=n_grid).
    pub fn n_grid(&self) -> usize {
        self.mode_samples.len() - 1
    }

    pub fn mode(&self, mode: usize, sample: usize) -> &[Complex64; 2] {
        &self.mode_samples[sample][mode]
    }
}

/// Floquet-mode populations (diagonal of the density matrix in the mode
/// basis); the only state the secular master equation tracks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub p: [f64; 2],
}

impl InitialState {
    /// Validates nonnegativity and normalization (1e-9 slack, then exact
    /// renormalization so downstream identities hold to machine precision).
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !(p1.is_finite() && p2.is_finite()) {
            return Err(Error::Domain("populations must be finite".into()));
        }
        if p1 < -1e-12 || p2 < -1e-12 {
            return Err(Error::Domain(format!(
                "populations must be nonnegative, got ({p1}, {p2})"
            )));
        }
        let (p1, p2) = (p1.max(0.0), p2.max(0.0));
        let total = p1 + p2;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "populations must sum to one, got {total}"
            )));
        }
        Ok(Self {
            p: [p1 / total, p2 / total],
        })
    }

    pub fn ground() -> Self {
        Self { p: [1.0, 0.0] }
    }
}

/// Closed-form Floquet solution of the Rabi problem.
///
/// With Delta = omega - Omega, tan(2 theta) = 2g / Delta (theta in [0, pi/2]),
/// Omega_R = sqrt(Delta^2 + 4 g^2):
///
///   eps1 = (Delta - Omega_R)/2,  mode1(t) = (cos theta, -e^{-i(Omega t - phi)} sin theta),
///   eps2 = (Delta + Omega_R)/2,  mode2(t) = (sin theta, +e^{-i(Omega t - phi)} cos theta),
///
/// labeled so the gap eps2 - eps1 = +Omega_R.
pub fn rabi_floquet(params: &RabiParameters) -> Result<FloquetSolution> {
    rabi_floquet_with_grid(params, DEFAULT_MODE_GRID)
}

pub fn rabi_floquet_with_grid(params: &RabiParameters, n_grid: usize) -> Result<FloquetSolution> {
    if !(params.omega_drive > 0.0) {
        return Err(Error::Domain(format!(
            "drive frequency Omega = {} must be positive",
            params.omega_drive
        )));
    }
    if params.g < 0.0 {
        return Err(Error::Domain(format!(
            "drive amplitude g = {} must be nonnegative",
            params.g
        )));
    }
    if n_grid < 4 {
        return Err(Error::Domain(format!(
            "mode grid {n_grid} too coarse (need >= 4)"
        )));
    }
    let delta = params.detuning();
    let omega_r = params.rabi_frequency();
    if omega_r == 0.0 {
        return Err(Error::Domain(
            "degenerate Rabi problem: g = 0 and Delta = 0".into(),
        ));
    }
    let theta = 0.5 * (2.0 * params.g).atan2(delta);
    let (sin_t, cos_t) = theta.sin_cos();
    let tau = params.period();

    let mut mode_samples = Vec::with_capacity(n_grid + 1);
    for j in 0..=n_grid {
        let t = j as f64 * tau / n_grid as f64;
        let ph = Complex64::from_polar(1.0, -(params.omega_drive * t - params.phi));
        mode_samples.push([
            [Complex64::new(cos_t, 0.0), -ph * sin_t],
            [Complex64::new(sin_t, 0.0), ph * cos_t],
        ]);
    }

    Ok(FloquetSolution {
        omega_drive: params.omega_drive,
        phi: params.phi,
        quasienergies: [0.5 * (delta - omega_r), 0.5 * (delta + omega_r)],
        omega_r,
        theta,
        mode_samples,
    })
}

/// Floquet solution of an arbitrary periodic 2x2 Hamiltonian from its
/// one-period propagator.
///
/// The propagator is accumulated with a fourth-order Magnus scheme on two
/// Gauss-Legendre nodes per substep (16384 substeps per period in total, so
/// the result does not shift with the sample grid). Quasienergies are the
/// principal monodromy eigenphases in [-Omega/2, Omega/2), sorted; modes are
/// gauged so their largest t = 0 component is real positive.
pub fn monodromy_floquet<H>(
    hamiltonian: H,
    omega_drive: f64,
    n_grid: usize,
) -> Result<FloquetSolution>
where
    H: Fn(f64) -> Matrix2,
{
    if !(omega_drive > 0.0) {
        return Err(Error::Domain(format!(
            "drive frequency Omega = {omega_drive} must be positive"
        )));
    }
    if n_grid < 4 {
        return Err(Error::Domain(format!(
            "mode grid {n_grid} too coarse (need >= 4)"
        )));
    }
    let tau = 2.0 * PI / omega_drive;
    for frac in [0.0, 0.37, 0.71] {
        let h = hamiltonian(frac * tau);
        let scale = h
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let defect = (h[0][1] - h[1][0].conj())
            .norm()
            .max(h[0][0].im.abs())
            .max(h[1][1].im.abs());
        if defect > 1e-12 * scale {
            return Err(Error::Domain(format!(
                "Hamiltonian is not Hermitian at t = {:.6} (defect {defect:.3e})",
                frac * tau
            )));
        }
    }
    let substeps = MAGNUS_SUBSTEPS.div_ceil(n_grid);

    // Gauss-Legendre nodes c = 1/2 -+ sqrt(3)/6 on each substep.
    let gauss_lo = 0.5 - 3f64.sqrt() / 6.0;
    let gauss_hi = 0.5 + 3f64.sqrt() / 6.0;

    let identity: Matrix2 = [
        [Complex64::new(1.0, 0.0), ZERO],
        [ZERO, Complex64::new(1.0, 0.0)],
    ];
    let mut u = identity;
    let mut u_at: Vec<Matrix2> = Vec::with_capacity(n_grid + 1);
    u_at.push(u);
    let minus_i = Complex64::new(0.0, -1.0);
    for j in 0..n_grid {
        let t0 = j as f64 * tau / n_grid as f64;
        let t1 = (j + 1) as f64 * tau / n_grid as f64;
        let h_sub = (t1 - t0) / substeps as f64;
        for s in 0..substeps {
            let ts = t0 + s as f64 * h_sub;
            let ha = hamiltonian(ts + gauss_lo * h_sub);
            let hb = hamiltonian(ts + gauss_hi * h_sub);
            // B_i = -i H(t_i); step generator
            // W = (h/2)(B1 + B2) + (sqrt(3) h^2 / 12) [B2, B1].
            let mut b1 = [[ZERO; 2]; 2];
            let mut b2 = [[ZERO; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    b1[r][c] = minus_i * ha[r][c];
                    b2[r][c] = minus_i * hb[r][c];
                }
            }
            let comm = commutator(&b2, &b1);
            let mut w = [[ZERO; 2]; 2];
            let c2 = 3f64.sqrt() * h_sub * h_sub / 12.0;
            for r in 0..2 {
                for c in 0..2 {
                    w[r][c] = 0.5 * h_sub * (b1[r][c] + b2[r][c]) + c2 * comm[r][c];
                }
            }
            u = matmul(&expm2(&w), &u);
        }
        u_at.push(u);
    }

    // Eigenpairs of the monodromy matrix U(tau).
    let tr = u[0][0] + u[1][1];
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    // Align the root with the trace to avoid cancellation in the larger root.
    let disc = if (tr.conj() * disc).re >= 0.0 {
        disc
    } else {
        -disc
    };
    let lam1 = 0.5 * (tr + disc);
    let lam2 = det / lam1;

    let eigvec = |lam: Complex64| -> [Complex64; 2] {
        let m = [[u[0][0] - lam, u[0][1]], [u[1][0], u[1][1] - lam]];
        let cand_a = [m[0][1], -m[0][0]];
        let cand_b = [m[1][1], -m[1][0]];
        let mut v = if norm_vec(&cand_a) >= norm_vec(&cand_b) {
            cand_a
        } else {
            cand_b
        };
        let n = norm_vec(&v);
        v[0] /= n;
        v[1] /= n;
        v
    };

    // Principal eigenphases: eps = -arg(lambda) / tau lands in
    // [-Omega/2, Omega/2), the first quasienergy zone.
    let mut pairs = [
        (-(lam1.arg()) / tau, eigvec(lam1)),
        (-(lam2.arg()) / tau, eigvec(lam2)),
    ];
    // Circular separation of the eigenphases decides resolvability.
    let raw = (pairs[0].0 - pairs[1].0).abs();
    let separation = raw.min(omega_drive - raw);
    if separation < 1e-10 * omega_drive {
        return Err(Error::QuasienergyCrossing { separation });
    }
    if pairs[0].0 > pairs[1].0 {
        pairs.swap(0, 1);
    }
    let (eps1, mut v1) = (pairs[0].0, pairs[0].1);
    let (eps2, mut v2) = (pairs[1].0, pairs[1].1);

    // Insurance against roundoff in the eigensolve: project and renormalize.
    let overlap = dot(&v1, &v2);
    v2[0] -= overlap * v1[0];
    v2[1] -= overlap * v1[1];
    let n2 = norm_vec(&v2);
    v2[0] /= n2;
    v2[1] /= n2;

    // Gauge: largest t = 0 component real positive.
    for v in [&mut v1, &mut v2] {
        let idx = if v[0].norm() >= v[1].norm() { 0 } else { 1 };
        let ph = Complex64::from_polar(1.0, -v[idx].arg());
        v[0] *= ph;
        v[1] *= ph;
    }

    let mut mode_samples = Vec::with_capacity(n_grid + 1);
    for (j, uj) in u_at.iter().enumerate() {
        let t = j as f64 * tau / n_grid as f64;
        let ph1 = Complex64::from_polar(1.0, eps1 * t);
        let ph2 = Complex64::from_polar(1.0, eps2 * t);
        let m1 = matvec(uj, &v1);
        let m2 = matvec(uj, &v2);
        mode_samples.push([[ph1 * m1[0], ph1 * m1[1]], [ph2 * m2[0], ph2 * m2[1]]]);
    }

    let theta = mode_samples[0][0][1]
        .norm()
        .atan2(mode_samples[0][0][0].norm());

    Ok(FloquetSolution {
        omega_drive,
        phi: 0.0,
        quasienergies: [eps1, eps2],
        omega_r: eps2 - eps1,
        theta,
        mode_samples,
    })
}

/// Floquet-mode populations of the bare pure state
/// cos(delta)|0> + e^{i gamma} sin(delta)|1>:
///
///   p1 = (1 + cos 2delta cos 2theta - sin 2delta sin 2theta cos(gamma + phi)) / 2.
pub fn bare_to_floquet_populations(delta: f64, gamma: f64, sol: &FloquetSolution) -> InitialState {
    let p1 = 0.5
        * (1.0 + (2.0 * delta).cos() * (2.0 * sol.theta).cos()
            - (2.0 * delta).sin() * (2.0 * sol.theta).sin() * (gamma + sol.phi).cos());
    let p1 = p1.clamp(0.0, 1.0);
    InitialState { p: [p1, 1.0 - p1] }
}
