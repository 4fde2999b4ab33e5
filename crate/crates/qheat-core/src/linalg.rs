//! Minimal 2x2 complex matrix helpers. Everything downstream is a two-state
//! problem, so fixed-size arrays beat a general linear-algebra dependency.

use num_complex::Complex64;

pub type Matrix2 = [[Complex64; 2]; 2];

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn matmul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub(crate) fn matvec(a: &Matrix2, v: &[Complex64; 2]) -> [Complex64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

pub(crate) fn commutator(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let ab = matmul(a, b);
    let ba = matmul(b, a);
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = ab[i][j] - ba[i][j];
        }
    }
    out
}

/// sinh(z)/z, series near the origin to dodge the 0/0.
pub(crate) fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// Closed-form exponential of a 2x2 complex matrix.
///
/// Split M = c I + M0 with M0 traceless; then M0^2 = -det(M0) I and
/// exp(M) = e^c [cosh(mu) I + sinhc(mu) M0] with mu^2 = -det(M0).
pub(crate) fn expm2(m: &Matrix2) -> Matrix2 {
    let c = 0.5 * (m[0][0] + m[1][1]);
    let m0 = [[m[0][0] - c, m[0][1]], [m[1][0], m[1][1] - c]];
    let det0 = m0[0][0] * m0[1][1] - m0[0][1] * m0[1][0];
    let mu = (-det0).sqrt();
    let ec = c.exp();
    let ch = mu.cosh();
    let sc = sinhc(mu);
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let diag = if i == j { ch } else { ZERO };
            out[i][j] = ec * (diag + sc * m0[i][j]);
        }
    }
    out
}

pub(crate) fn norm_vec(v: &[Complex64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

pub(crate) fn dot(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expm2_matches_series_on_random_matrix() {
        let m: Matrix2 = [[c(0.3, -0.2), c(-0.1, 0.7)], [c(0.5, 0.1), c(-0.4, 0.25)]];
        // Scaled Taylor series as an independent reference.
        let n = 40usize;
        let scale = 1.0 / 1024.0;
        let ms: Matrix2 = [
            [m[0][0] * scale, m[0][1] * scale],
            [m[1][0] * scale, m[1][1] * scale],
        ];
        let mut series: Matrix2 = [[c(1.0, 0.0), ZERO], [ZERO, c(1.0, 0.0)]];
        let mut term: Matrix2 = series;
        for k in 1..=n {
            term = matmul(&term, &ms);
            for i in 0..2 {
                for j in 0..2 {
                    term[i][j] /= k as f64;
                    series[i][j] += term[i][j];
                }
            }
        }
        let mut reference = series;
        for _ in 0..10 {
            reference = matmul(&reference, &reference);
        }
        let direct = expm2(&m);
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (direct[i][j] - reference[i][j]).norm() < 1e-12,
                    "expm2 entry ({i},{j}) off: {} vs {}",
                    direct[i][j],
                    reference[i][j]
                );
            }
        }
    }

    #[test]
    fn expm2_of_zero_is_identity() {
        let z = [[ZERO; 2]; 2];
        let e = expm2(&z);
        assert!((e[0][0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((e[1][1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(e[0][1].norm() < 1e-15 && e[1][0].norm() < 1e-15);
    }

    #[test]
    fn sinhc_series_joins_direct_branch() {
        for &s in &[0.9e-4, 1.1e-4] {
            let z = c(s, 0.5e-4);
            let direct = z.sinh() / z;
            assert!((sinhc(z) - direct).norm() < 1e-14);
        }
    }
}
