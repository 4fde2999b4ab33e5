//! Cross-checks the closed-form characteristic function against a from-scratch
//! oracle: the tilted matrix is rebuilt channel by channel and the two-level
//! system is integrated with an adaptive Runge-Kutta-Fehlberg 4(5) stepper, so
//! neither the generator assembly nor the exponential formula is shared with
//! the library path.

use num_complex::Complex64;
use qheat_core::bath::BathParameters;
use qheat_core::floquet::{rabi_floquet, InitialState, RabiParameters};
use qheat_core::rates::{coupling_fourier, partial_rates, sigma_z_elements, RateTable};
use qheat_core::tilted::characteristic_function;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Vec2 = [Complex64; 2];

/// Tilted matrix assembled directly from the channel list: a jump through
/// channel (alpha, beta, k) moves beta -> alpha and deposits heat -Delta in
/// the bath, so the gain term carries exp(-i nu Delta) while the loss term
/// drains column beta unweighted.
fn tilted_matrix(table: &RateTable, nu: f64) -> [[Complex64; 2]; 2] {
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for ch in &table.channels {
        m[ch.alpha][ch.beta] += ch.rate * Complex64::new(0.0, -nu * ch.delta).exp();
        m[ch.beta][ch.beta] -= ch.rate;
    }
    m
}

fn axpy(y: &Vec2, a: f64, x: &Vec2) -> Vec2 {
    [y[0] + a * x[0], y[1] + a * x[1]]
}

fn apply(m: &[[Complex64; 2]; 2], v: &Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Integrates dy/dt = M y from 0 to t with embedded 4(5) error control and
/// returns y(t). Tolerances are far below the comparison threshold.
fn rkf45(m: &[[Complex64; 2]; 2], y0: Vec2, t_end: f64) -> Vec2 {
    const RTOL: f64 = 1e-11;
    const ATOL: f64 = 1e-13;
    if t_end == 0.0 {
        return y0;
    }
    let norm = m
        .iter()
        .map(|row| row[0].norm() + row[1].norm())
        .fold(0.0_f64, f64::max);
    let mut h = (0.1 / norm.max(1e-12)).min(t_end);
    let mut t = 0.0;
    let mut y = y0;
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        assert!(steps < 2_000_000, "oracle integrator stalled at t = {t}");
        h = h.min(t_end - t);
        let k1 = apply(m, &y);
        let k2 = apply(m, &axpy(&y, h / 4.0, &k1));
        let y3 = axpy(&axpy(&y, 3.0 * h / 32.0, &k1), 9.0 * h / 32.0, &k2);
        let k3 = apply(m, &y3);
        let y4 = axpy(
            &axpy(
                &axpy(&y, 1932.0 * h / 2197.0, &k1),
                -7200.0 * h / 2197.0,
                &k2,
            ),
            7296.0 * h / 2197.0,
            &k3,
        );
        let k4 = apply(m, &y4);
        let y5 = axpy(
            &axpy(
                &axpy(&axpy(&y, 439.0 * h / 216.0, &k1), -8.0 * h, &k2),
                3680.0 * h / 513.0,
                &k3,
            ),
            -845.0 * h / 4104.0,
            &k4,
        );
        let k5 = apply(m, &y5);
        let y6 = axpy(
            &axpy(
                &axpy(
                    &axpy(&axpy(&y, -8.0 * h / 27.0, &k1), 2.0 * h, &k2),
                    -3544.0 * h / 2565.0,
                    &k3,
                ),
                1859.0 * h / 4104.0,
                &k4,
            ),
            -11.0 * h / 40.0,
            &k5,
        );
        let k6 = apply(m, &y6);
        let high = axpy(
            &axpy(
                &axpy(&axpy(&y, 16.0 * h / 135.0, &k1), 6656.0 * h / 12825.0, &k3),
                28561.0 * h / 56430.0,
                &k4,
            ),
            -9.0 * h / 50.0,
            &k5,
        );
        let high = axpy(&high, 2.0 * h / 55.0, &k6);
        let low = axpy(
            &axpy(
                &axpy(&axpy(&y, 25.0 * h / 216.0, &k1), 1408.0 * h / 2565.0, &k3),
                2197.0 * h / 4104.0,
                &k4,
            ),
            -h / 5.0,
            &k5,
        );
        let err = (high[0] - low[0]).norm().max((high[1] - low[1]).norm());
        let ynorm = high[0].norm().max(high[1].norm());
        let scale = ATOL + RTOL * ynorm.max(1.0);
        if err <= scale {
            t += h;
            y = high;
        }
        let ratio = if err > 0.0 { scale / err } else { 10.0 };
        h *= (0.9 * ratio.powf(0.2)).clamp(0.2, 5.0);
    }
    y
}

fn oracle_cf(table: &RateTable, init: &InitialState, nu: f64, t: f64) -> Complex64 {
    let m = tilted_matrix(table, nu);
    let y0 = [
        Complex64::new(init.p[0], 0.0),
        Complex64::new(init.p[1], 0.0),
    ];
    let y = rkf45(&m, y0, t);
    y[0] + y[1]
}

fn compare_over_random_points(
    table: &RateTable,
    init: &InitialState,
    rng: &mut ChaCha8Rng,
    n: usize,
) {
    let sigma = table.sigma();
    for _ in 0..n {
        let nu = rng.gen_range(-12.0..12.0);
        let t = rng.gen_range(0.0..40.0 / sigma.max(1e-6));
        let lib = characteristic_function(table, init, nu, t).unwrap();
        let ode = oracle_cf(table, init, nu, t);
        let diff = (lib - ode).norm();
        assert!(
            diff < 5e-9,
            "CF mismatch: nu = {nu}, t = {t}, lib = {lib}, ode = {ode}, diff = {diff:.3e}"
        );
    }
}

fn sigma_x_table(omega: f64, g: f64, omega_drive: f64, eta: f64, beta: f64) -> RateTable {
    let params = RabiParameters {
        omega,
        g,
        omega_drive,
        phi: 0.0,
    };
    let sol = rabi_floquet(&params).unwrap();
    let coupling = [
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    ];
    let elements = coupling_fourier(&coupling, &sol, 2).unwrap();
    partial_rates(&elements, &sol, &BathParameters { eta, beta })
}

#[test]
fn transverse_coupling_matches_direct_integration() {
    let table = sigma_x_table(1.0, 0.1, 0.98, 0.01, 10.0);
    let init = InitialState::new(0.7, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7101);
    compare_over_random_points(&table, &init, &mut rng, 16);
}

#[test]
fn longitudinal_coupling_matches_direct_integration() {
    let params = RabiParameters {
        omega: 1.0,
        g: 0.1,
        omega_drive: 0.98,
        phi: 0.0,
    };
    let sol = rabi_floquet(&params).unwrap();
    let elements = sigma_z_elements(sol.theta);
    let table = partial_rates(
        &elements,
        &sol,
        &BathParameters {
            eta: 0.01,
            beta: 2.0,
        },
    );
    let init = InitialState::new(0.5, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7102);
    compare_over_random_points(&table, &init, &mut rng, 16);
}

#[test]
fn random_couplings_match_direct_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7103);
    for _ in 0..4 {
        let omega = 1.0;
        let g = rng.gen_range(0.03..0.2);
        let omega_drive = rng.gen_range(0.8..1.2);
        let eta = rng.gen_range(0.005..0.04);
        let beta = rng.gen_range(0.5..12.0);
        let params = RabiParameters {
            omega,
            g,
            omega_drive,
            phi: rng.gen_range(0.0..1.0),
        };
        let sol = rabi_floquet(&params).unwrap();
        // Random Hermitian coupling: real diagonal, conjugate off-diagonal.
        let d0 = rng.gen_range(-1.0..1.0);
        let d1 = rng.gen_range(-1.0..1.0);
        let off = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let coupling = [
            [Complex64::new(d0, 0.0), off],
            [off.conj(), Complex64::new(d1, 0.0)],
        ];
        let elements = coupling_fourier(&coupling, &sol, 2).unwrap();
        let table = partial_rates(&elements, &sol, &BathParameters { eta, beta });
        let p1 = rng.gen_range(0.05..0.95);
        let init = InitialState::new(p1, 1.0 - p1).unwrap();
        compare_over_random_points(&table, &init, &mut rng, 6);
    }
}

#[test]
fn zero_counting_field_is_exactly_normalized() {
    let table = sigma_x_table(1.0, 0.1, 0.98, 0.01, 10.0);
    let init = InitialState::new(0.25, 0.75).unwrap();
    for &t in &[0.0, 3.0, 57.0, 911.0] {
        let g = characteristic_function(&table, &init, 0.0, t).unwrap();
        assert!(
            (g - Complex64::new(1.0, 0.0)).norm() < 1e-12,
            "G(0, {t}) = {g}"
        );
    }
}
