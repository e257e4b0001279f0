//! Complex digamma function and the coth decomposition built on it.
//!
//! The thermal weights of the spectral sums evaluate the digamma function at
//! `1 - i*omega/(2*pi*T)` with `omega` a pole in the upper half-plane, so the
//! arguments always lie in the right half-plane and the asymptotic series
//! after upward recurrence is accurate to ~1e-14.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `- B_{2n} / (2n)` for the Stirling-type expansion of psi.
const ASYMP: [f64; 7] = [
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
];

const RECURRENCE_EDGE: f64 = 9.0;

/// Digamma function for complex arguments.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && (z.re - z.re.round()).abs() < 1e-12 {
        return Err(Error::DigammaPole(z));
    }
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    // reflection keeps the recurrence short for far-left arguments
    if z.re < 0.5 {
        // psi(z) = psi(1 - z) - pi / tan(pi z)
        let pi = std::f64::consts::PI;
        let cot = (pi * z).cos() / (pi * z).sin();
        shift -= pi * cot;
        z = 1.0 - z;
    }
    while z.re < RECURRENCE_EDGE {
        shift -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv2;
    for c in ASYMP {
        series += c * p;
        p *= inv2;
    }
    Ok(z.ln() - 0.5 / z + series + shift)
}

/// `psi(1 - i*omega/(2*pi*T))` with the exact `T = 0` limit.
///
/// At `T = 0` the divergent `-ln T` piece is dropped: any constant shift of
/// this function cancels identically in the assembled covariance blocks and
/// heat currents, so the limit `ln(-i*omega/(2*pi))` is the correct analytic
/// continuation for those sums.
pub fn psi_thermal(omega: Complex64, temperature: f64) -> Result<Complex64> {
    if temperature > 0.0 {
        let arg = Complex64::new(1.0, 0.0)
            - Complex64::new(0.0, 1.0) * omega / (2.0 * std::f64::consts::PI * temperature);
        digamma(arg)
    } else {
        let w = Complex64::new(0.0, -1.0) * omega / (2.0 * std::f64::consts::PI);
        if w.norm() == 0.0 {
            return Err(Error::DivergentArgument(
                "psi_thermal needs omega != 0 at T = 0".into(),
            ));
        }
        Ok(w.ln())
    }
}

/// `coth(omega / (2 T))`, with `T = 0` meaning `sign(omega)`.
pub fn coth_half(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return omega.signum();
    }
    let x = omega / (2.0 * temperature);
    // tanh is accurate everywhere; 1/tanh overflows gracefully to +-1
    1.0 / x.tanh()
}

/// `coth(omega / 2T) - 1 = 2 n(omega)` with `n` the Bose occupation, for
/// `omega > 0`. Computing the excess directly keeps differences of two
/// near-unity coths (the drive in a heat-current integrand) free of
/// cancellation noise deep in the exponential tail.
pub fn coth_half_excess(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    2.0 / (omega / temperature).exp_m1()
}

/// Residual of the coth-digamma identity; a self-test of [`digamma`].
pub fn coth_split_residual(omega: f64, temperature: f64) -> Result<f64> {
    let t = temperature;
    let i = Complex64::new(0.0, 1.0);
    let pi = std::f64::consts::PI;
    let wp = Complex64::new(omega, 0.0);
    let lhs = Complex64::new(coth_half(omega, t), 0.0);
    let rhs = 2.0 * t / wp - digamma(1.0 - i * wp / (2.0 * pi * t))? / (i * pi)
        + digamma(1.0 + i * wp / (2.0 * pi * t))? / (i * pi);
    Ok((lhs - rhs).norm())
}
