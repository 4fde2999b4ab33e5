use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the heat-statistics pipeline.
///
/// Numerical-precision failures are kept distinct from domain errors so that
/// callers can tell "widen the window / raise the grid" apart from "bad input".
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// The coupling Fourier series does not converge within the requested
    /// harmonic cutoff: the tail carries more than 1e-12 of the total power.
    #[error(
        "coupling Fourier tail holds {tail:.3e} of the total power at k_max = {k_max}; \
         k_max >= {k_needed} required"
    )]
    Truncation {
        k_max: usize,
        tail: f64,
        k_needed: usize,
    },

    /// Monodromy eigenphases too close to separate Floquet modes reliably.
    #[error("quasienergy crossing: eigenphase separation {separation:.3e} of the drive frequency")]
    QuasienergyCrossing { separation: f64 },

    /// A12 + A21 = 0: no relaxation, the dynamic steady state is not unique.
    #[error("degenerate generator: A12 + A21 = 0, dynamic steady state undefined")]
    DegenerateGenerator,

    /// The Richardson ladder for a cumulant derivative did not converge.
    #[error(
        "numerical differentiation failed at cumulant order {order}: \
         best ladder error {best_error:.3e} against scale {scale:.3e}"
    )]
    DifferentiationFailure {
        order: usize,
        best_error: f64,
        scale: f64,
    },

    /// The Gaussian envelope needs a positive curvature coefficient.
    #[error("invalid expansion: envelope coefficient b = {b:.6e} is not positive")]
    InvalidExpansion { b: f64 },

    /// The atom window missed probability mass (or the envelope placed
    /// spurious mass): total weight must be 1 within 1e-8.
    #[error("atom window holds total weight {total:.12}; unit mass required within 1e-8")]
    MassDeficit { total: f64 },

    /// Inverted comb weights came out non-real beyond tolerance.
    #[error("comb decomposition failed: atom weight residual {max_imag:.3e} exceeds 1e-10")]
    DecompositionFailure { max_imag: f64 },

    /// The inversion grid is too coarse for the distribution's spread.
    #[error("inversion grid cannot resolve the distribution: total weight {total:.12}")]
    Resolution { total: f64 },

    /// A sampled trajectory heat does not sit on the {n Omega + m Omega_R} lattice.
    #[error("trajectory heat {sample:.9e} is off-lattice by {residue:.3e}")]
    LatticeViolation { sample: f64, residue: f64 },

    /// Runaway jump process: a single trajectory exceeded the event budget.
    #[error("event cap {cap} exceeded within one trajectory; rates too fast for the horizon")]
    EventCap { cap: u64 },
}
