//! Bessel functions of the first kind for real order ν ≥ 0 and real x ≥ 0.
//!
//! Small arguments use the power series, larger ones Miller's backward
//! recurrence normalized by the Neumann sum
//! (x/2)^ν₀ = Σ_k (ν₀+2k) Γ(ν₀+k)/k! · J_{ν₀+2k}(x).

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Γ(ν+1), exact-ish for integer and half-integer ν via upward recurrence.
pub fn gamma_p1(nu: f64) -> f64 {
    if nu > 170.0 {
        return f64::INFINITY;
    }
    let n = nu.floor();
    let f = nu - n;
    let mut g = if f == 0.0 {
        1.0
    } else if f == 0.5 {
        0.5 * PI.sqrt()
    } else {
        gamma(f + 1.0)
    };
    for k in 1..=(n as u64) {
        g *= f + k as f64;
    }
    g
}

/// ln Γ(ν+1).
pub fn ln_gamma_p1(nu: f64) -> f64 {
    if nu < 150.0 {
        gamma_p1(nu).ln()
    } else {
        ln_gamma(nu + 1.0)
    }
}

/// Whether the power series is well conditioned at (ν, x).
///
/// With q = (x/2)² ≤ (ν+1)/2 every term ratio is at most ½ in modulus, so the
/// absolute sum is below 2 while the scaled value stays above ½.
#[inline]
fn series_ok(nu: f64, x: f64) -> bool {
    let q = 0.25 * x * x;
    q <= 0.5 * (nu + 1.0)
}

/// Scaled series S(ν,x) = Σ_k (−q)^k / (k! (ν+1)_k), q = (x/2)².
///
/// J_ν(x) = (x/2)^ν / Γ(ν+1) · S(ν,x).
fn scaled_series(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (nu + k));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > q {
            break;
        }
        if k > 2000.0 {
            break;
        }
    }
    sum
}

/// Miller backward recurrence. Requires x > 0.
fn miller(nu: f64, x: f64) -> f64 {
    let n = nu.floor() as usize;
    let nu0 = nu - n as f64;
    let big = (n as f64).max(x);
    let mut start = (big + 20.0 + (160.0 * big).sqrt()) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    // Neumann coefficients c_k for orders ν₀ + 2k.
    let kmax = start / 2;
    let mut coef = Vec::with_capacity(kmax + 1);
    let g0 = gamma_p1(nu0);
    coef.push(g0);
    let mut d = g0;
    for k in 1..=kmax {
        let kf = k as f64;
        if k > 1 {
            d *= (nu0 + kf - 1.0) / kf;
        }
        coef.push((nu0 + 2.0 * kf) * d);
    }

    let mut jp1 = 0.0;
    let mut j = 1e-280;
    let mut sum = 0.0;
    let mut val_n = 0.0;
    for k in (0..=start).rev() {
        if k == n {
            val_n = j;
        }
        if k % 2 == 0 {
            sum += coef[k / 2] * j;
        }
        if k > 0 {
            let jm1 = 2.0 * (nu0 + k as f64) / x * j - jp1;
            jp1 = j;
            j = jm1;
            if j.abs() > 1e250 {
                j *= 1e-250;
                jp1 *= 1e-250;
                sum *= 1e-250;
                val_n *= 1e-250;
            }
        }
    }
    val_n * (0.5 * x).powf(nu0) / sum
}

/// J_ν(x) without argument checks.
pub(crate) fn jv(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if series_ok(nu, x) {
        let s = scaled_series(nu, x);
        let pre =
            if nu < 100.0 { (0.5 * x).powf(nu) / gamma_p1(nu) } else { (nu * (0.5 * x).ln() - ln_gamma_p1(nu)).exp() };
        pre * s
    } else {
        miller(nu, x)
    }
}

/// Γ(ν+1)(x/2)^{−ν} J_ν(x), finite and O(1) for small x at any order.
pub(crate) fn jv_scaled(nu: f64, x: f64) -> f64 {
    if series_ok(nu, x) {
        return scaled_series(nu, x);
    }
    let j = miller(nu, x);
    if j == 0.0 {
        return 0.0;
    }
    j.signum() * (j.abs().ln() + ln_gamma_p1(nu) - nu * (0.5 * x).ln()).exp()
}

/// d/dx J_ν(x) = (ν/x) J_ν(x) − J_{ν+1}(x).
pub(crate) fn jv_prime(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 1.0 {
            0.5
        } else if nu == 0.0 || nu > 1.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    nu / x * jv(nu, x) - jv(nu + 1.0, x)
}

fn check_order(nu: f64) -> Result<()> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("Bessel order must be finite and >= 0, got {nu}")));
    }
    Ok(())
}

fn check_arg(x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// Bessel function of the first kind J_ν(x).
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_order(nu)?;
    check_arg(x)?;
    Ok(jv(nu, x))
}

/// Derivative J′_ν(x).
pub fn bessel_j_prime(nu: f64, x: f64) -> Result<f64> {
    check_order(nu)?;
    check_arg(x)?;
    Ok(jv_prime(nu, x))
}

/// Scaled Bessel function Γ(ν+1)(x/2)^{−ν} J_ν(x).
pub fn bessel_j_scaled(nu: f64, x: f64) -> Result<f64> {
    check_order(nu)?;
    check_arg(x)?;
    Ok(jv_scaled(nu, x))
}

/// Spherical Bessel function j_m(x) = √(π/(2x)) J_{m+½}(x).
pub fn spherical_bessel_j(m: u32, x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(sph_jn(m, x))
}

pub(crate) fn sph_jn(m: u32, x: f64) -> f64 {
    let nu = m as f64 + 0.5;
    if x == 0.0 || series_ok(nu, x) {
        // √π/2 (x/2)^m / Γ(m+3/2) · S(m+½, x)
        let pre = if m < 100 {
            0.5 * PI.sqrt() * (0.5 * x).powi(m as i32) / gamma_p1(nu)
        } else {
            (0.5 * PI.ln() - 2f64.ln() + m as f64 * (0.5 * x).ln() - ln_gamma_p1(nu)).exp()
        };
        return pre * scaled_series(nu, x);
    }
    (PI / (2.0 * x)).sqrt() * miller(nu, x)
}

/// The s-th positive zero j_{ν,s} of J_ν.
pub fn bessel_zero(nu: f64, s: u32) -> Result<f64> {
    check_order(nu)?;
    if s == 0 {
        return Err(Error::Domain("zero index s must be >= 1".into()));
    }
    let step = 0.1;
    let mut a = nu + 0.5;
    let mut fa = jv(nu, a);
    let mut found = 0;
    // Interlacing puts j_{ν,1} above ν; successive zeros are spaced by about π.
    let limit = nu + (s as f64 + 1.0) * PI + 10.0 * (nu + 1.0);
    loop {
        let b = a + step;
        if b > limit {
            return Err(Error::NoRoot(format!("zero {s} of J_{nu} not bracketed below {limit}")));
        }
        let fb = jv(nu, b);
        if fa == 0.0 {
            found += 1;
            if found == s {
                return Ok(a);
            }
        } else if fa * fb < 0.0 {
            found += 1;
            if found == s {
                return Ok(refine_zero(nu, a, b, fa));
            }
        }
        a = b;
        fa = fb;
    }
}

fn refine_zero(nu: f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > 1e-6 {
        let c = 0.5 * (a + b);
        let fc = jv(nu, c);
        if fc == 0.0 {
            return c;
        }
        if fa * fc < 0.0 {
            b = c;
        } else {
            a = c;
            fa = fc;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..20 {
        let dx = jv(nu, x) / jv_prime(nu, x);
        x -= dx;
        if dx.abs() < 1e-14 * x {
            break;
        }
    }
    x
}
