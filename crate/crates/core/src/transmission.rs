//! Normalized interior-transmission eigenfunctions v on balls, their peak
//! amplitudes, the correction series I₁–I₄ and the mode-order threshold.
//!
//! Radial profiles are carried in the scaled form S(ν,r) = Γ(ν+1)(r/2)^{−ν}J_ν(r)
//! so that β and J_m never need to be formed separately:
//! 2D: β J_m(r) = (2π)^{−½} (r/r₀)^m S(m,r) / (r₀ √K),
//! 3D: β j_m(r) = r^{−½} (r/r₀)^ν S(ν,r) / (r₀ √K), ν = m + ½,
//! with K = ∫₀¹ s^{2ν+1} S(ν, r₀ s)² ds.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::specialfn::{bessel_zero, jv_scaled, ln_gamma_p1, spherical_harmonic_max, ylm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionMode {
    pub dim: u8,
    pub m: u32,
    /// Azimuthal index, 3D only.
    pub l: i32,
    pub r0: f64,
    pub center: Vec<f64>,
    /// ln β; β itself overflows for large m.
    pub ln_beta: f64,
    pub n_index: Option<f64>,
    /// K = ∫₀¹ s^{2ν+1} S(ν, r₀ s)² ds.
    pub k_norm: f64,
}

fn order(dim: u8, m: u32) -> f64 {
    if dim == 2 {
        m as f64
    } else {
        m as f64 + 0.5
    }
}

fn k_integral(nu: f64, r0: f64) -> f64 {
    integrate(|s| s.powf(2.0 * nu + 1.0) * jv_scaled(nu, r0 * s).powi(2), 0.0, 1.0, 1e-13)
}

/// ln β for the normalized mode.
pub fn ln_normalization_beta(dim: u8, m: u32, r0: f64) -> Result<f64> {
    check_params(dim, m, 0, r0)?;
    let nu = order(dim, m);
    Ok(ln_beta_from_k(dim, nu, r0, k_integral(nu, r0)))
}

fn ln_beta_from_k(dim: u8, nu: f64, r0: f64, k: f64) -> f64 {
    // ln ∫₀^{r₀} J_ν(r)² r dr = 2 ln r₀ + 2ν ln(r₀/2) − 2 lnΓ(ν+1) + ln K
    let ln_int = 2.0 * r0.ln() + 2.0 * nu * (0.5 * r0).ln() - 2.0 * ln_gamma_p1(nu) + k.ln();
    let pre = if dim == 2 { -0.5 * (2.0 * PI).ln() } else { 0.5 * (2.0 / PI).ln() };
    pre - 0.5 * ln_int
}

/// β_m (2D) or β_m^l (3D); infinite when it exceeds double range.
pub fn normalization_beta(dim: u8, m: u32, r0: f64) -> Result<f64> {
    Ok(ln_normalization_beta(dim, m, r0)?.exp())
}

fn check_params(dim: u8, m: u32, l: i32, r0: f64) -> Result<()> {
    if dim != 2 && dim != 3 {
        return Err(Error::Dimension(format!("dimension must be 2 or 3, got {dim}")));
    }
    if m == 0 {
        return Err(Error::Domain("mode order m must be >= 1".into()));
    }
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Domain(format!("r0 must be positive, got {r0}")));
    }
    if dim == 3 && l.unsigned_abs() > m {
        return Err(Error::Domain(format!("|l| = {} exceeds m = {m}", l.unsigned_abs())));
    }
    Ok(())
}

impl TransmissionMode {
    /// Builds the mode; requires m > r₀ so the radial profile is monotone on (0, r₀].
    pub fn new(dim: u8, m: u32, l: i32, r0: f64, center: &[f64]) -> Result<Self> {
        check_params(dim, m, l, r0)?;
        if center.len() != dim as usize {
            return Err(Error::Dimension(format!("center has {} coordinates, expected {dim}", center.len())));
        }
        if !(m as f64 > r0) {
            return Err(Error::Domain(format!("mode order m = {m} must exceed r0 = {r0}")));
        }
        let nu = order(dim, m);
        let k = k_integral(nu, r0);
        Ok(TransmissionMode {
            dim,
            m,
            l: if dim == 2 { 0 } else { l },
            r0,
            center: center.to_vec(),
            ln_beta: ln_beta_from_k(dim, nu, r0, k),
            n_index: None,
            k_norm: k,
        })
    }

    pub fn new_2d(m: u32, r0: f64, center: [f64; 2]) -> Result<Self> {
        Self::new(2, m, 0, r0, &center)
    }

    pub fn beta(&self) -> f64 {
        self.ln_beta.exp()
    }

    pub fn nu(&self) -> f64 {
        order(self.dim, self.m)
    }

    /// Fills in 𝔫 for the given branch.
    pub fn with_refraction_index(mut self, branch: u32) -> Result<Self> {
        self.n_index = Some(refraction_index(self.dim, self.m, self.r0, branch)?);
        Ok(self)
    }

    /// Radial factor R(r) and R′(r); the angular factor is applied by callers.
    fn radial(&self, r: f64) -> (f64, f64) {
        let nu = self.nu();
        let scale = 1.0 / (self.r0 * self.k_norm.sqrt());
        let s0 = jv_scaled(nu, r);
        let s1 = jv_scaled(nu + 1.0, r);
        let p = (r / self.r0).powf(nu);
        if self.dim == 2 {
            let c = scale / (2.0 * PI).sqrt();
            let val = c * p * s0;
            let der = c * p * (nu / r * s0 - 0.5 * r / (nu + 1.0) * s1);
            (val, der)
        } else {
            // r^{−½}(r/r₀)^ν S(ν,r) = r₀^{−½} (r/r₀)^m S(ν,r)
            let pm = (r / self.r0).powi(self.m as i32) / self.r0.sqrt();
            let val = scale * pm * s0;
            let der = scale * pm * (self.m as f64 / r * s0 - 0.5 * r / (nu + 1.0) * s1);
            (val, der)
        }
    }

    fn offset(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim as usize {
            return Err(Error::Dimension(format!("point has {} coordinates, expected {}", x.len(), self.dim)));
        }
        Ok(x.iter().zip(&self.center).map(|(a, b)| a - b).collect())
    }

    /// v(x); the formula is used for every r > 0, callers restrict to the ball.
    pub fn eval_v(&self, x: &[f64]) -> Result<Complex64> {
        let d = self.offset(x)?;
        let r = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (rad, _) = self.radial(r);
        Ok(if self.dim == 2 {
            Complex64::from_polar(rad, self.m as f64 * d[1].atan2(d[0]))
        } else {
            let theta = (d[2] / r).clamp(-1.0, 1.0).acos();
            let phi = d[1].atan2(d[0]);
            ylm(self.m, self.l, theta, phi) * rad
        })
    }

    /// (v, ∇v) at x. The 2D gradient is analytic; the 3D angular part uses
    /// fourth-order central differences.
    pub fn eval_v_grad(&self, x: &[f64]) -> Result<(Complex64, Vec<Complex64>)> {
        let d = self.offset(x)?;
        let r = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        if self.dim == 2 {
            let zero = Complex64::new(0.0, 0.0);
            if r == 0.0 {
                if self.m == 1 {
                    let c = 1.0 / ((2.0 * PI).sqrt() * self.r0 * self.r0 * self.k_norm.sqrt());
                    return Ok((zero, vec![Complex64::new(c, 0.0), Complex64::new(0.0, c)]));
                }
                return Ok((zero, vec![zero, zero]));
            }
            let (rad, drad) = self.radial(r);
            let th = d[1].atan2(d[0]);
            let e = Complex64::from_polar(1.0, self.m as f64 * th);
            let (c, s) = (th.cos(), th.sin());
            let gr = e * drad;
            let gt = e * Complex64::new(0.0, self.m as f64 * rad / r);
            Ok((e * rad, vec![gr * c - gt * s, gr * s + gt * c]))
        } else {
            let v = self.eval_v(x)?;
            let h = 1e-4 * self.r0;
            let mut g = Vec::with_capacity(3);
            for k in 0..3 {
                let at = |t: f64| {
                    let mut p = x.to_vec();
                    p[k] += t;
                    self.eval_v(&p)
                };
                let fd = (at(-2.0 * h)? - at(2.0 * h)? + (at(h)? - at(-h)?) * 8.0) / (12.0 * h);
                g.push(fd);
            }
            Ok((v, g))
        }
    }
}

/// Scaled characteristic function for 𝔫, positive factors removed:
/// g(n) = S(ν+1,r₀) S(ν,nr₀) − n² S(ν+1,nr₀) S(ν,r₀).
pub fn characteristic(dim: u8, m: u32, r0: f64, n: f64) -> f64 {
    let nu = order(dim, m);
    jv_scaled(nu + 1.0, r0) * jv_scaled(nu, n * r0) - n * n * jv_scaled(nu + 1.0, n * r0) * jv_scaled(nu, r0)
}

/// The branch-th root 𝔫 > 1 of the transmission characteristic equation.
pub fn refraction_index(dim: u8, m: u32, r0: f64, branch: u32) -> Result<f64> {
    check_params(dim, m, 0, r0)?;
    if branch == 0 {
        return Err(Error::Domain("branch must be >= 1".into()));
    }
    if !(m as f64 > r0) {
        return Err(Error::Domain(format!("mode order m = {m} must exceed r0 = {r0}")));
    }
    let nu = order(dim, m);
    let n_max = bessel_zero(nu, branch + 1)? / r0;
    refraction_index_in(dim, m, r0, branch, n_max)
}

/// As [`refraction_index`] with an explicit scan window [1, n_max].
pub fn refraction_index_in(dim: u8, m: u32, r0: f64, branch: u32, n_max: f64) -> Result<f64> {
    let f = |n: f64| characteristic(dim, m, r0, n);
    let step = 0.02 / r0;
    let mut a = 1.0 + 1e-3;
    let mut fa = f(a);
    let mut found = 0;
    while a < n_max {
        let b = (a + step).min(n_max);
        let fb = f(b);
        if fa * fb < 0.0 {
            found += 1;
            if found == branch {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                while hi - lo > 1e-12 * hi {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid);
                    if fm * flo <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                return Ok(0.5 * (lo + hi));
            }
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoRoot(format!(
        "branch {branch} of the characteristic equation not found in [1, {n_max}] (dim {dim}, m {m}, r0 {r0})"
    )))
}

/// Which of the four remainder series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesIndex {
    I1,
    I2,
    I3,
    I4,
}

impl SeriesIndex {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(SeriesIndex::I1),
            2 => Ok(SeriesIndex::I2),
            3 => Ok(SeriesIndex::I3),
            4 => Ok(SeriesIndex::I4),
            _ => Err(Error::Domain(format!("series index must be 1..=4, got {i}"))),
        }
    }
}

fn sum_until_small(mut term: impl FnMut(usize) -> f64, tol: f64) -> f64 {
    let mut sum = 0.0;
    let mut small = 0;
    for k in 1..100_000 {
        let t = term(k);
        sum += t;
        if t.abs() < tol * (1.0 + sum.abs()) {
            small += 1;
            if small == 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum
}

/// Direct summation of I₁…I₄ with iterative Gamma ratios.
pub fn series_i(index: SeriesIndex, m: u32, r0: f64, tol: f64) -> f64 {
    let q = 0.25 * r0 * r0;
    let mf = m as f64;
    let nu = match index {
        SeriesIndex::I1 | SeriesIndex::I2 => mf + 0.5,
        SeriesIndex::I3 | SeriesIndex::I4 => mf,
    };
    match index {
        SeriesIndex::I1 | SeriesIndex::I3 => {
            let pre = match index {
                SeriesIndex::I1 => (2.0 * mf + 3.0).sqrt() * r0.powf(-1.5),
                _ => (2.0 * mf + 2.0).sqrt() / r0,
            };
            // b_k = (−q)^k Γ(ν+1) / (k! Γ(ν+k+1))
            let mut b = 1.0;
            pre * sum_until_small(
                |k| {
                    let kf = k as f64;
                    b *= -q / (kf * (nu + kf));
                    b
                },
                tol,
            )
        }
        SeriesIndex::I2 | SeriesIndex::I4 => {
            // a_j = q^j Γ(ν+1) / (j! Γ(ν+j+1)); the k-th term is
            // (−1)^k Σ_{k₁+k₂=k} a_{k₁} a_{k₂} · (2ν+2)/(2ν+2k+2).
            let mut a = vec![1.0];
            let two_nu2 = 2.0 * nu + 2.0;
            sum_until_small(
                |k| {
                    let kf = k as f64;
                    let next = a[k - 1] * q / (kf * (nu + kf));
                    a.push(next);
                    let conv: f64 = (0..=k).map(|j| a[j] * a[k - j]).sum();
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * conv * two_nu2 / (two_nu2 + 2.0 * kf)
                },
                tol,
            )
        }
    }
}

/// Explicit upper bounds on |I_i| from the decay argument.
pub fn series_i_bound(index: SeriesIndex, m: u32, r0: f64) -> f64 {
    let mf = m as f64;
    let beta = 0.25 * r0 * r0;
    match index {
        SeriesIndex::I1 => (2.0 * mf + 3.0).sqrt() / (mf + 0.5) * r0.powf(-1.5) * beta * beta.exp(),
        SeriesIndex::I2 => (r0 * r0 / (2.0 * mf + 3.0)).exp_m1(),
        SeriesIndex::I3 => (2.0 * mf + 2.0).sqrt() / mf / r0 * beta * beta.exp(),
        SeriesIndex::I4 => (r0 * r0 / (2.0 * mf + 2.0)).exp_m1(),
    }
}

const SERIES_TOL: f64 = 1e-16;

/// Closed-form radial maximum in 3D: (√(2m+3) r₀^{−3/2} + I₁)/√(1+I₂).
pub fn radial_peak_3d(m: u32, r0: f64) -> f64 {
    let mf = m as f64;
    ((2.0 * mf + 3.0).sqrt() * r0.powf(-1.5) + series_i(SeriesIndex::I1, m, r0, SERIES_TOL))
        / (1.0 + series_i(SeriesIndex::I2, m, r0, SERIES_TOL)).sqrt()
}

/// Closed-form peak of |v| in 2D: (2π)^{−½}(√(2m+2) r₀^{−1} + I₃)/√(1+I₄).
pub fn peak_2d(m: u32, r0: f64) -> f64 {
    let mf = m as f64;
    ((2.0 * mf + 2.0).sqrt() / r0 + series_i(SeriesIndex::I3, m, r0, SERIES_TOL))
        / (1.0 + series_i(SeriesIndex::I4, m, r0, SERIES_TOL)).sqrt()
        / (2.0 * PI).sqrt()
}

/// A maximizer y* on ∂B_{r₀}(center) and max |v| there.
pub fn peak_amplitude(mode: &TransmissionMode) -> (Vec<f64>, f64) {
    let c = &mode.center;
    if mode.dim == 2 {
        (vec![c[0] + mode.r0, c[1]], peak_2d(mode.m, mode.r0))
    } else {
        let (theta, ymax) = spherical_harmonic_max(mode.m, mode.l);
        let p = vec![c[0] + mode.r0 * theta.sin(), c[1], c[2] + mode.r0 * theta.cos()];
        (p, radial_peak_3d(mode.m, mode.r0) * ymax)
    }
}

/// Lower bound (1/16)√(2m+3) r₀^{−3/2} on the 3D peak.
pub fn peak_lower_bound_3d(m: u32, r0: f64) -> f64 {
    (2.0 * m as f64 + 3.0).sqrt() * r0.powf(-1.5) / 16.0
}

/// Lower bound √(2m+2) r₀^{−1}/(2√(2π)) on the 2D peak.
pub fn peak_lower_bound_2d(m: u32, r0: f64) -> f64 {
    (2.0 * m as f64 + 2.0).sqrt() / r0 / (2.0 * (2.0 * PI).sqrt())
}

fn order_qualifies(m: u32, r0: f64) -> bool {
    let half_3d = 0.5 * (2.0 * m as f64 + 3.0).sqrt() * r0.powf(-1.5);
    radial_peak_3d(m, r0) > half_3d && peak_2d(m, r0) >= peak_lower_bound_2d(m, r0)
}

/// Smallest m ≥ ⌊r₀⌋+1 where both peak inequalities hold, checked on m..=m+8.
pub fn min_mode_order(r0: f64) -> Result<u32> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Domain(format!("r0 must be positive, got {r0}")));
    }
    const LIMIT: u32 = 1_000_000;
    const WINDOW: u32 = 8;
    let start = (r0.floor() as u32 + 1).max(1);
    let mut m = start;
    let mut run = 0;
    let mut first = m;
    while m <= LIMIT + WINDOW {
        if order_qualifies(m, r0) {
            if run == 0 {
                first = m;
            }
            run += 1;
            if run > WINDOW {
                return Ok(first);
            }
        } else {
            run = 0;
        }
        m += 1;
    }
    Err(Error::ScanLimit(format!("no mode order up to {LIMIT} satisfies the peak bounds for r0 = {r0}")))
}
