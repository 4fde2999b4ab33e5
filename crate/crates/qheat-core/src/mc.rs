//! Stochastic unraveling of the zero-field master equation: Gillespie jump
//! trajectories whose per-jump heat is the negative channel frequency, used
//! as an end-to-end cross-check of the counting-field results.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::floquet::InitialState;
use crate::heat::{HeatAtom, HeatDistribution};
use crate::rates::RateTable;

/// Trajectories per RNG shard; fixed so results are independent of the
/// thread count.
const SHARD: usize = 1024;

/// Safety cap on jump events per trajectory.
const EVENT_CAP: u64 = 10_000_000;

/// Heat records of a trajectory ensemble at a common final time.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub samples: Vec<f64>,
    pub t: f64,
    pub seed: u64,
}

impl TrajectoryEnsemble {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.len() as f64;
        let mean = self.mean();
        self.samples.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    /// Standard error of the mean.
    pub fn se_mean(&self) -> f64 {
        (self.variance() / self.len() as f64).sqrt()
    }

    /// Standard error of the variance from the empirical fourth moment,
    /// sqrt((m4 - m2^2) / N).
    pub fn se_variance(&self) -> f64 {
        let n = self.len() as f64;
        let mean = self.mean();
        let m2 = self.samples.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / n;
        let m4 = self.samples.iter().map(|q| (q - mean).powi(4)).sum::<f64>() / n;
        ((m4 - m2 * m2) / n).sqrt()
    }
}

struct JumpChannel {
    alpha: usize,
    delta: f64,
    rate: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Samples `n_traj` heat records up to time `t` by Gillespie simulation.
///
/// Diagonal k = 0 channels are no-ops (no state change, zero heat) and are
/// excluded from the jump process; diagonal k != 0 channels stay, carrying
/// heat without changing the state. Trajectories are grouped into shards of
/// 1024 with per-shard ChaCha streams derived from `seed`, so the output is
/// reproducible and independent of the rayon thread pool.
pub fn sample_heat(
    table: &RateTable,
    init: &InitialState,
    t: f64,
    n_traj: usize,
    seed: u64,
) -> Result<TrajectoryEnsemble> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be nonnegative")));
    }
    if n_traj == 0 {
        return Err(Error::Domain("need at least one trajectory".into()));
    }

    let mut by_state: [Vec<JumpChannel>; 2] = [Vec::new(), Vec::new()];
    for ch in &table.channels {
        if ch.alpha == ch.beta && ch.k == 0 {
            continue;
        }
        if ch.rate > 0.0 {
            by_state[ch.beta].push(JumpChannel {
                alpha: ch.alpha,
                delta: ch.delta,
                rate: ch.rate,
            });
        }
    }
    let exit_rate = [
        by_state[0].iter().map(|c| c.rate).sum::<f64>(),
        by_state[1].iter().map(|c| c.rate).sum::<f64>(),
    ];

    let n_shards = n_traj.div_ceil(SHARD);
    let shards: Result<Vec<Vec<f64>>> = (0..n_shards)
        .into_par_iter()
        .map(|s| {
            let stream =
                splitmix64(seed.wrapping_add((s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            let count = SHARD.min(n_traj - s * SHARD);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                out.push(run_trajectory(&by_state, &exit_rate, init, t, &mut rng)?);
            }
            Ok(out)
        })
        .collect();

    Ok(TrajectoryEnsemble {
        samples: shards?.concat(),
        t,
        seed,
    })
}

fn run_trajectory(
    by_state: &[Vec<JumpChannel>; 2],
    exit_rate: &[f64; 2],
    init: &InitialState,
    t: f64,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut state = usize::from(rng.gen::<f64>() >= init.p[0]);
    let mut heat = 0.0f64;
    let mut elapsed = 0.0f64;
    let mut events = 0u64;
    loop {
        let total = exit_rate[state];
        if total <= 0.0 {
            break;
        }
        // Waiting time first, then the channel.
        let dt = -(1.0 - rng.gen::<f64>()).ln() / total;
        if elapsed + dt > t {
            break;
        }
        elapsed += dt;
        let mut pick = rng.gen::<f64>() * total;
        let channels = &by_state[state];
        let mut chosen = channels.len() - 1;
        for (i, ch) in channels.iter().enumerate() {
            pick -= ch.rate;
            if pick <= 0.0 {
                chosen = i;
                break;
            }
        }
        let ch = &channels[chosen];
        heat -= ch.delta;
        state = ch.alpha;
        events += 1;
        if events >= EVENT_CAP {
            return Err(Error::EventCap { cap: EVENT_CAP });
        }
    }
    Ok(heat)
}

/// Histogram of an ensemble snapped onto the {n Omega + m Omega_R} lattice,
/// m in {-1, 0, 1}. A sample further than 1e-9 from every lattice point is a
/// `LatticeViolation`.
pub fn empirical_distribution(
    ensemble: &TrajectoryEnsemble,
    table: &RateTable,
) -> Result<HeatDistribution> {
    if ensemble.is_empty() {
        return Err(Error::Domain("empty ensemble".into()));
    }
    let omega = table.omega_drive;
    let mut counts: BTreeMap<(i64, i8), u64> = BTreeMap::new();
    for &q in &ensemble.samples {
        let mut best: Option<(f64, (i64, i8))> = None;
        for m in [-1i8, 0, 1] {
            let n = ((q - m as f64 * table.omega_r) / omega).round() as i64;
            let residue = (q - n as f64 * omega - m as f64 * table.omega_r).abs();
            if best.is_none_or(|(r, _)| residue < r) {
                best = Some((residue, (n, m)));
            }
        }
        let (residue, key) = best.unwrap();
        if residue > 1e-9 {
            return Err(Error::LatticeViolation { sample: q, residue });
        }
        *counts.entry(key).or_insert(0) += 1;
    }
    let n = ensemble.len() as f64;
    let atoms = counts
        .into_iter()
        .map(|((nn, mm), c)| HeatAtom {
            n: nn,
            m: mm,
            w: c as f64 / n,
        })
        .collect();
    Ok(HeatDistribution {
        atoms,
        t: ensemble.t,
        omega_drive: omega,
        omega_r: table.omega_r,
        envelope: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathParameters;
    use crate::closed_forms::{sigma_z_pdf, LongitudinalRates};
    use crate::floquet::{rabi_floquet, RabiParameters};
    use crate::rates::{partial_rates, sigma_x_elements, sigma_z_elements};
    use crate::tilted::dss;

    fn reference_solution() -> (crate::floquet::FloquetSolution, BathParameters) {
        let sol = rabi_floquet(&RabiParameters {
            omega: 1.0,
            g: 0.1,
            omega_drive: 0.98,
            phi: 0.0,
        })
        .unwrap();
        let bath = BathParameters::new(0.01, 10.0).unwrap();
        (sol, bath)
    }

    #[test]
    fn seeded_runs_are_bitwise_reproducible() {
        let (sol, bath) = reference_solution();
        let table = partial_rates(&sigma_x_elements(sol.theta, 1).unwrap(), &sol, &bath);
        let init = InitialState::ground();
        let a = sample_heat(&table, &init, 50.0, 300, 7).unwrap();
        let b = sample_heat(&table, &init, 50.0, 300, 7).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = sample_heat(&table, &init, 50.0, 300, 8).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn longitudinal_histogram_matches_the_closed_form() {
        let (sol, bath) = reference_solution();
        let table = partial_rates(&sigma_z_elements(sol.theta), &sol, &bath);
        let rates = LongitudinalRates::from_table(&table).unwrap();
        let init = InitialState::new(0.3, 0.7).unwrap();
        let t = 1.2 / rates.total();
        let n = 20_000usize;
        let ens = sample_heat(&table, &init, t, n, 2024).unwrap();
        let hist = empirical_distribution(&ens, &table).unwrap();
        let closed = sigma_z_pdf(&rates, &init, t).unwrap();
        for atom in &hist.atoms {
            assert_eq!(atom.n, 0, "longitudinal heat has no drive quanta");
        }
        for atom in &closed.atoms {
            let p = atom.w;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let observed = hist.weight(atom.n, atom.m);
            assert!(
                (observed - p).abs() <= 5.0 * se + 1e-12,
                "atom ({}, {}): observed {observed}, expected {p}, se {se}",
                atom.n,
                atom.m
            );
        }
    }

    #[test]
    fn transverse_moments_match_the_counting_field() {
        let (sol, bath) = reference_solution();
        let table = partial_rates(&sigma_x_elements(sol.theta, 1).unwrap(), &sol, &bath);
        let init = dss(&table).unwrap();
        let t = 80.0 * table.tau();
        let n = 20_000usize;
        let ens = sample_heat(&table, &init, t, n, 99).unwrap();
        // Exact finite-time moments from the characteristic-function inversion.
        let exact = crate::heat::finite_time_pdf(&table, &init, t, 512).unwrap();
        let (mean, var) = (exact.mean(), exact.variance());
        assert!(
            (mean - 14.5777).abs() < 1e-3,
            "inversion mean drifted: {mean}"
        );
        assert!(
            (ens.mean() - mean).abs() <= 4.0 * ens.se_mean(),
            "mean {} vs {mean} (se {})",
            ens.mean(),
            ens.se_mean()
        );
        assert!(
            (ens.variance() - var).abs() <= 4.0 * ens.se_variance(),
            "variance {} vs {var} (se {})",
            ens.variance(),
            ens.se_variance()
        );
        let hist = empirical_distribution(&ens, &table).unwrap();
        assert!((hist.total_weight() - 1.0).abs() < 1e-12);
        let hist_mean = hist.mean();
        assert!((hist_mean - ens.mean()).abs() < 1e-9);
    }

    #[test]
    fn runaway_trajectories_hit_the_event_cap() {
        // Classical-limit bath: huge rates, so one long trajectory exceeds
        // the per-trajectory event budget.
        let sol = rabi_floquet(&RabiParameters {
            omega: 1.0,
            g: 0.02,
            omega_drive: 1.0,
            phi: 0.0,
        })
        .unwrap();
        let bath = BathParameters::new(10.0, 0.01).unwrap();
        let table = partial_rates(&sigma_z_elements(sol.theta), &sol, &bath);
        let init = InitialState::ground();
        match sample_heat(&table, &init, 1.0e5, 1, 1) {
            Err(Error::EventCap { cap }) => assert_eq!(cap, EVENT_CAP),
            other => panic!("expected event cap, got {other:?}"),
        }
    }

    #[test]
    fn off_lattice_samples_are_rejected() {
        let (sol, bath) = reference_solution();
        let table = partial_rates(&sigma_x_elements(sol.theta, 1).unwrap(), &sol, &bath);
        let ens = TrajectoryEnsemble {
            samples: vec![0.0, table.omega_drive + 0.37 * table.omega_r],
            t: 1.0,
            seed: 0,
        };
        match empirical_distribution(&ens, &table) {
            Err(Error::LatticeViolation { residue, .. }) => assert!(residue > 1e-9),
            other => panic!("expected lattice violation, got {other:?}"),
        }
    }
}
