//! F₁, F₂, ĉ and N̂ for the splittings u = u₀ + 𝒰 and U = u₀ + 𝒰.

use num_complex::Complex64;

use super::coeffs::{CoefficientSet, Mat2};
use super::{ComplexField, Grid2D};
use crate::geometry::Point;
use crate::herglotz::{Jet2, U0};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// −∇·(K∇u) from a jet of u and K, ∂ₓK, ∂ᵧK.
fn div_flux(k: &Mat2, dk: &[Mat2; 2], j: &Jet2) -> Complex64 {
    let g = [j.dx, j.dy];
    let h = [[j.dxx, j.dxy], [j.dxy, j.dyy]];
    let mut s = ZERO;
    for a in 0..2 {
        for b in 0..2 {
            s += dk[a][a][b] * g[b] + k[a][b] * h[a][b];
        }
    }
    -s
}

/// N(U) = Σ α_k U^k.
pub fn nonlinearity(coeffs: &CoefficientSet, x: Point, t: f64, u: Complex64) -> Complex64 {
    powers(coeffs).into_iter().map(|k| coeffs.alpha(k, x, t) * u.powu(k)).sum()
}

fn powers(coeffs: &CoefficientSet) -> Vec<u32> {
    let mut ks: Vec<u32> = coeffs.alphas.iter().map(|a| a.k).collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// Which source a `SourceTerm` represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    F1,
    F2,
}

/// F₁ = ∇·((I − A₁)∇u₀) or F₂ = ∇·((I − A₂)∇u₀) − c u₀ − Σ α_k u₀^k.
#[derive(Debug, Clone)]
pub struct SourceTerm {
    pub kind: SourceKind,
    pub coeffs: CoefficientSet,
    pub u0: U0,
}

pub fn assemble_f1(coeffs: &CoefficientSet, u0: &U0) -> SourceTerm {
    SourceTerm { kind: SourceKind::F1, coeffs: coeffs.clone(), u0: u0.clone() }
}

pub fn assemble_f2(coeffs: &CoefficientSet, u0: &U0) -> SourceTerm {
    SourceTerm { kind: SourceKind::F2, coeffs: coeffs.clone(), u0: u0.clone() }
}

impl SourceTerm {
    pub fn eval(&self, x: Point, t: f64) -> Complex64 {
        if self.coeffs.bump.value(x) == 0.0 {
            return ZERO;
        }
        self.from_jet(x, t, &self.u0.jet2(x, t))
    }

    /// Value from a precomputed jet of u₀ at (x, t).
    pub fn from_jet(&self, x: Point, t: f64, j: &Jet2) -> Complex64 {
        let c = &self.coeffs;
        match self.kind {
            SourceKind::F1 => div_flux(&c.k1(x), &c.k1_grad(x), j),
            SourceKind::F2 => {
                let mut f = div_flux(&c.k2(x, t), &c.k2_grad(x, t), j) - c.c(x, t) * j.v;
                for k in powers(c) {
                    f -= c.alpha(k, x, t) * j.v.powu(k);
                }
                f
            }
        }
    }
}

/// ĉ = c + Σ k α_k u₀^{k−1}.
#[derive(Debug, Clone)]
pub struct HatC {
    pub coeffs: CoefficientSet,
    pub u0: U0,
}

pub fn assemble_hat_c(coeffs: &CoefficientSet, u0: &U0) -> HatC {
    HatC { coeffs: coeffs.clone(), u0: u0.clone() }
}

impl HatC {
    pub fn eval(&self, x: Point, t: f64) -> Complex64 {
        if self.coeffs.bump.value(x) == 0.0 {
            return ZERO;
        }
        hat_c_from(&self.coeffs, x, t, self.u0.value(&x, t).unwrap_or(ZERO))
    }
}

pub(crate) fn hat_c_from(c: &CoefficientSet, x: Point, t: f64, u0: Complex64) -> Complex64 {
    let mut s = c.c(x, t);
    for k in powers(c) {
        s += c.alpha(k, x, t) * (k as f64) * u0.powu(k - 1);
    }
    s
}

/// N̂(W) = Σ_k α_k Σ_{i=2}^k C(k,i) u₀^{k−i} W^i at one point.
pub(crate) fn hat_n_from(c: &CoefficientSet, x: Point, t: f64, u0: Complex64, w: Complex64) -> Complex64 {
    let mut s = ZERO;
    for k in powers(c) {
        let a = c.alpha(k, x, t);
        if a == ZERO {
            continue;
        }
        let mut inner = ZERO;
        for i in 2..=k {
            inner += u0.powu(k - i) * w.powu(i) * binomial(k, i);
        }
        s += a * inner;
    }
    s
}

/// N̂(W) on the grid of `w`, at time w.t.
pub fn eval_hat_n(coeffs: &CoefficientSet, u0: &U0, w: &ComplexField) -> ComplexField {
    let mut out = w.clone();
    for i in 0..w.nx {
        for j in 0..w.ny {
            let x = w.point(i, j);
            out.values[i * w.ny + j] = if coeffs.bump.value(x) == 0.0 {
                ZERO
            } else {
                hat_n_from(coeffs, x, w.t, u0.value(&x, w.t).unwrap_or(ZERO), w.get(i, j))
            };
        }
    }
    out
}

/// u₀ jets at t = 0 on the grid nodes where the coefficient bump is positive.
#[derive(Debug, Clone)]
pub struct U0Samples {
    pub idx: Vec<usize>,
    pub points: Vec<Point>,
    pub jets: Vec<Jet2>,
}

impl U0Samples {
    pub fn new(grid: &Grid2D, coeffs: &CoefficientSet, u0: &U0) -> Self {
        let mut s = U0Samples { idx: vec![], points: vec![], jets: vec![] };
        for i in 1..grid.nx - 1 {
            for j in 1..grid.ny - 1 {
                let x = grid.point(i, j);
                if coeffs.bump.value(x) > 0.0 {
                    s.idx.push(grid.idx(i, j));
                    s.points.push(x);
                    s.jets.push(u0.kernel.jet2(x));
                }
            }
        }
        s
    }

    pub fn jet(&self, k: usize, t: f64) -> Jet2 {
        self.jets[k].scale(U0::time_factor(t))
    }

    pub fn source(&self, src: &SourceTerm, t: f64) -> Vec<(usize, Complex64)> {
        (0..self.idx.len()).map(|k| (self.idx[k], src.from_jet(self.points[k], t, &self.jet(k, t)))).collect()
    }
}
