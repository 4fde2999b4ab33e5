//! The two routes into a rate table, closed-form Rabi modes with analytic
//! coupling elements versus numerical monodromy modes with DFT-extracted
//! elements, must agree end to end: quasienergies, channel rates, stationary
//! state, characteristic function and cumulants.

use num_complex::Complex64;
use qheat_core::bath::BathParameters;
use qheat_core::floquet::{monodromy_floquet, rabi_floquet, InitialState, RabiParameters};
use qheat_core::heat::{finite_time_pdf, longtime_cumulants};
use qheat_core::rates::{coupling_fourier, partial_rates, sigma_x_elements, RateTable};
use qheat_core::tilted::{characteristic_function, dss};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIGMA_X: [[Complex64; 2]; 2] = [
    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
];

fn closed_table(params: &RabiParameters, bath: &BathParameters) -> RateTable {
    let sol = rabi_floquet(params).unwrap();
    let elements = sigma_x_elements(sol.theta, 3).unwrap();
    partial_rates(&elements, &sol, bath)
}

fn monodromy_table(params: &RabiParameters, bath: &BathParameters) -> RateTable {
    let p = *params;
    let sol = monodromy_floquet(move |t| p.hamiltonian(t), params.omega_drive, 512).unwrap();
    let elements = coupling_fourier(&SIGMA_X, &sol, 3).unwrap();
    partial_rates(&elements, &sol, bath)
}

fn rate_of(table: &RateTable, alpha: usize, beta: usize, k: i64) -> f64 {
    table
        .channels
        .iter()
        .find(|ch| ch.alpha == alpha && ch.beta == beta && ch.k == k)
        .map(|ch| ch.rate)
        .unwrap_or(0.0)
}

#[test]
fn monodromy_route_reproduces_the_closed_route() {
    let params = RabiParameters {
        omega: 1.0,
        g: 0.1,
        omega_drive: 0.98,
        phi: 0.0,
    };
    let bath = BathParameters {
        eta: 0.01,
        beta: 10.0,
    };
    let closed = closed_table(&params, &bath);
    let mono = monodromy_table(&params, &bath);

    assert!((closed.omega_r - mono.omega_r).abs() < 1e-10);
    for a in 0..2 {
        assert!((closed.quasienergies[a] - mono.quasienergies[a]).abs() < 1e-10);
    }

    let scale = closed
        .channels
        .iter()
        .map(|ch| ch.rate)
        .fold(0.0_f64, f64::max);
    for a in 0..2 {
        for b in 0..2 {
            let rel = (closed.totals[a][b] - mono.totals[a][b]).abs() / scale;
            assert!(rel < 1e-9, "totals[{a}][{b}] differ by {rel:.3e} of scale");
            for k in -3..=3 {
                let diff = (rate_of(&closed, a, b, k) - rate_of(&mono, a, b, k)).abs();
                assert!(
                    diff < 1e-9 * scale,
                    "channel ({a}, {b}, {k}) differs by {diff:.3e}"
                );
            }
        }
    }

    let dss_c = dss(&closed).unwrap();
    let dss_m = dss(&mono).unwrap();
    assert!((dss_c.p[0] - dss_m.p[0]).abs() < 1e-10);
}

#[test]
fn both_routes_agree_on_observables() {
    let params = RabiParameters {
        omega: 1.0,
        g: 0.1,
        omega_drive: 0.98,
        phi: 0.0,
    };
    let bath = BathParameters {
        eta: 0.01,
        beta: 10.0,
    };
    let closed = closed_table(&params, &bath);
    let mono = monodromy_table(&params, &bath);
    let init = dss(&closed).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for _ in 0..10 {
        let nu = rng.gen_range(-10.0..10.0);
        let t = rng.gen_range(0.0..3000.0);
        let gc = characteristic_function(&closed, &init, nu, t).unwrap();
        let gm = characteristic_function(&mono, &init, nu, t).unwrap();
        assert!(
            (gc - gm).norm() < 1e-8,
            "CF routes differ at nu = {nu}, t = {t}"
        );
    }

    let t = 700.0 * closed.tau();
    let cc = longtime_cumulants(&closed, t, 3).unwrap();
    let cm = longtime_cumulants(&mono, t, 3).unwrap();
    assert!((cc.mean_rate - cm.mean_rate).abs() / cc.mean_rate.abs() < 1e-8);
    let (vc, vm) = (cc.variance_rate.unwrap(), cm.variance_rate.unwrap());
    assert!((vc - vm).abs() / vc.abs() < 1e-7);

    let pc = finite_time_pdf(&closed, &init, 80.0 * closed.tau(), 256).unwrap();
    let pm = finite_time_pdf(&mono, &init, 80.0 * mono.tau(), 256).unwrap();
    assert!((pc.mean() - pm.mean()).abs() < 1e-8);
    assert!((pc.variance() - pm.variance()).abs() < 1e-7);
}

#[test]
fn routes_agree_off_resonance_with_phase() {
    let params = RabiParameters {
        omega: 1.0,
        g: 0.17,
        omega_drive: 1.21,
        phi: 0.6,
    };
    let bath = BathParameters {
        eta: 0.02,
        beta: 3.0,
    };
    let closed = closed_table(&params, &bath);
    let mono = monodromy_table(&params, &bath);
    let scale = closed
        .channels
        .iter()
        .map(|ch| ch.rate)
        .fold(0.0_f64, f64::max);
    for a in 0..2 {
        for b in 0..2 {
            for k in -3..=3 {
                let diff = (rate_of(&closed, a, b, k) - rate_of(&mono, a, b, k)).abs();
                assert!(
                    diff < 1e-8 * scale,
                    "channel ({a}, {b}, {k}) differs by {diff:.3e}"
                );
            }
        }
    }
    let init = InitialState::ground();
    let g1 = characteristic_function(&closed, &init, 4.2, 800.0).unwrap();
    let g2 = characteristic_function(&mono, &init, 4.2, 800.0).unwrap();
    assert!((g1 - g2).norm() < 1e-8);
}
