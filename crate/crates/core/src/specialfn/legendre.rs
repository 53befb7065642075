//! Associated Legendre functions (Condon–Shortley phase) and spherical harmonics.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalized P̄_n^m(x) = √((n−m)!/(n+m)!) · P_n^m(x), stable for large orders.
pub(crate) fn legendre_normalized(n: u32, m: u32, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    // P̄_m^m = (−1)^m Π_{i=1}^m √((2i−1)/(2i)) s^m
    let mut pmm = 1.0;
    for i in 1..=m {
        let i = i as f64;
        pmm *= -((2.0 * i - 1.0) / (2.0 * i)).sqrt() * s;
    }
    if n == m {
        return pmm;
    }
    let mf = m as f64;
    let mut p_prev = pmm;
    let mut p = x * (2.0 * mf + 1.0).sqrt() * pmm;
    for l in (m + 2)..=n {
        let lf = l as f64;
        let a = (2.0 * lf - 1.0) * x / (lf * lf - mf * mf).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (lf * lf - mf * mf)).sqrt();
        let next = a * p - b * p_prev;
        p_prev = p;
        p = next;
    }
    p
}

fn check(n: u32, m: u32, x: f64) -> Result<()> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    if m > n {
        return Err(Error::Domain(format!("Legendre order m = {m} exceeds degree n = {n}")));
    }
    Ok(())
}

/// Ferrers associated Legendre function P_n^m(x), Condon–Shortley phase included.
pub fn assoc_legendre(n: u32, m: u32, x: f64) -> Result<f64> {
    check(n, m, x)?;
    let mut scale = 1.0;
    for k in (n - m + 1)..=(n + m) {
        scale *= (k as f64).sqrt();
    }
    Ok(legendre_normalized(n, m, x) * scale)
}

/// √((n−m)!/(n+m)!) · P_n^m(x).
pub fn assoc_legendre_normalized(n: u32, m: u32, x: f64) -> Result<f64> {
    check(n, m, x)?;
    Ok(legendre_normalized(n, m, x))
}

/// Y_m^l(θ,φ) = √((2m+1)/(4π) · (m−|l|)!/(m+|l|)!) P_m^{|l|}(cos θ) e^{ilφ}.
pub fn spherical_harmonic(m: u32, l: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if l.unsigned_abs() > m {
        return Err(Error::Domain(format!("|l| = {} exceeds m = {m}", l.unsigned_abs())));
    }
    Ok(ylm(m, l, theta, phi))
}

pub(crate) fn ylm(m: u32, l: i32, theta: f64, phi: f64) -> Complex64 {
    let p = legendre_normalized(m, l.unsigned_abs(), theta.cos());
    let amp = ((2.0 * m as f64 + 1.0) / (4.0 * PI)).sqrt() * p;
    Complex64::from_polar(1.0, l as f64 * phi) * amp
}

/// max over θ of |Y_m^l(θ, ·)| and a maximizing θ.
///
/// |P| is multimodal in θ, so a coarse scan picks the bracket before golden section.
pub fn spherical_harmonic_max(m: u32, l: i32) -> (f64, f64) {
    let la = l.unsigned_abs();
    let f = |t: f64| legendre_normalized(m, la, t.cos()).abs();
    let n = 64 * (m as usize + 1);
    let h = PI / n as f64;
    let mut best = (0.0, f(0.0));
    for i in 1..=n {
        let t = i as f64 * h;
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let (mut a, mut b) = ((best.0 - h).max(0.0), (best.0 + h).min(PI));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    let v = f(t).max(best.1);
    let norm = ((2.0 * m as f64 + 1.0) / (4.0 * PI)).sqrt();
    (t, norm * v)
}
