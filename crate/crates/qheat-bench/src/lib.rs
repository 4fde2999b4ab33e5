//! Shared fixtures for the criterion benches.

use qheat_core::bath::BathParameters;
use qheat_core::floquet::{rabi_floquet, InitialState, RabiParameters};
use qheat_core::rates::{partial_rates, sigma_x_elements, RateTable};
use qheat_core::tilted::dss;

/// Weakly driven transverse benchmark point: resolvable Rabi sidebands,
/// every channel active, nothing accidentally degenerate.
pub fn reference_params() -> RabiParameters {
    RabiParameters {
        omega: 1.0,
        g: 0.1,
        omega_drive: 0.98,
        phi: 0.0,
    }
}

pub fn reference_table(k_max: usize) -> (RateTable, InitialState) {
    let sol = rabi_floquet(&reference_params()).unwrap();
    let elements = sigma_x_elements(sol.theta, k_max).unwrap();
    let bath = BathParameters::new(0.01, 10.0).unwrap();
    let table = partial_rates(&elements, &sol, &bath);
    let init = dss(&table).unwrap();
    (table, init)
}
