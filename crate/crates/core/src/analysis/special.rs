//! Error-function family. `erf`/`erfc` delegate to libm's vetted rational
//! approximations (|eps| well below 1e-12); `erfcx` adds the scaled
//! complementary form needed to evaluate exp(d^2)*(erf(x+d)-erf(d))
//! products without overflow at small linewidths.

/// erf(x).
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// erfc(x) = 1 - erf(x).
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function erfcx(x) = exp(x^2) erfc(x).
///
/// For moderate arguments the direct product is exact enough; for large x a
/// Laplace continued fraction avoids the overflow of exp(x^2).
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        // erfcx(-x) = 2 exp(x^2) - erfcx(x); only small |x| occur here.
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < 12.0 {
        (x * x).exp() * libm::erfc(x)
    } else {
        // erfcx(x) = 1/sqrt(pi) * 1/(x + 1/(2x + 2/(x + 3/(2x + ...))))
        let mut f = 0.0;
        for k in (1..=60).rev() {
            let num = k as f64;
            let den = if k % 2 == 1 { x + f } else { 2.0 * x + f };
            f = num / den;
        }
        1.0 / ((x + f) * std::f64::consts::PI.sqrt())
    }
}
