//! Named coefficient profiles. Every contrast is a smooth bump times a
//! constant matrix, so supports sit inside D by construction.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Grid2D;
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub(crate) fn identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

fn scale(m: Mat2, s: f64) -> Mat2 {
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

fn add(a: Mat2, b: Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

/// Smallest eigenvalue of a Hermitian 2×2 matrix.
pub(crate) fn min_eig_hermitian(m: &Mat2) -> f64 {
    let (a, d) = (m[0][0].re, m[1][1].re);
    0.5 * (a + d) - (0.25 * (a - d).powi(2) + m[0][1].norm_sqr()).sqrt()
}

fn hermitian_defect(m: &Mat2) -> f64 {
    (m[0][1] - m[1][0].conj()).norm() + m[0][0].im.abs() + m[1][1].im.abs()
}

/// χ(x) = exp(1 − 1/(1 − s²)), s = |x − c|/R, zero for s ≥ 1; χ(c) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Point,
    pub radius: f64,
}

impl Bump {
    pub fn value(&self, x: Point) -> f64 {
        let s2 = ((x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2)) / (self.radius * self.radius);
        if s2 >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s2)).exp()
        }
    }

    pub fn grad(&self, x: Point) -> [f64; 2] {
        let (ox, oy) = (x[0] - self.center[0], x[1] - self.center[1]);
        let r2 = self.radius * self.radius;
        let s2 = (ox * ox + oy * oy) / r2;
        if s2 >= 1.0 {
            return [0.0, 0.0];
        }
        let f = -2.0 * self.value(x) / (r2 * (1.0 - s2).powi(2));
        [f * ox, f * oy]
    }

    /// Largest bump centred at D's centroid that fits inside D with a margin.
    pub fn inside(d: &Region, fill: f64) -> Result<Bump> {
        let c = d.centroid();
        let depth = -d.signed_distance(c);
        if !(depth > 0.0) {
            return Err(Error::Domain("the centroid of D is not interior".into()));
        }
        Ok(Bump { center: c, radius: fill.clamp(0.05, 1.0) * depth })
    }
}

/// A₁ − I = χ(x) K₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContrastProfile {
    Identity,
    /// K₀ = amplitude · I.
    IsotropicBump {
        amplitude: f64,
    },
    /// K₀ = contrast · [[cos a, i sin a], [−i sin a, −cos a]], eigenvalues ±contrast.
    HermitianRotation {
        angle: f64,
        contrast: f64,
    },
}

impl ContrastProfile {
    pub fn matrix(&self) -> Mat2 {
        match *self {
            ContrastProfile::Identity => [[ZERO; 2]; 2],
            ContrastProfile::IsotropicBump { amplitude } => scale(identity(), amplitude),
            ContrastProfile::HermitianRotation { angle, contrast } => {
                let (s, c) = angle.sin_cos();
                [
                    [Complex64::new(contrast * c, 0.0), Complex64::new(0.0, contrast * s)],
                    [Complex64::new(0.0, -contrast * s), Complex64::new(-contrast * c, 0.0)],
                ]
            }
        }
    }
}

/// B(t) used for A₂ inside D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BSpec {
    Identity,
    Constant {
        profile: ContrastProfile,
    },
    /// I + contrast·[[cos ωt, i sin ωt], [−i sin ωt, −cos ωt]].
    Rotating {
        contrast: f64,
        omega: f64,
    },
}

impl BSpec {
    /// B(t) − I.
    pub fn contrast(&self, t: f64) -> Mat2 {
        match *self {
            BSpec::Identity => [[ZERO; 2]; 2],
            BSpec::Constant { profile } => profile.matrix(),
            BSpec::Rotating { contrast, omega } => {
                ContrastProfile::HermitianRotation { angle: omega * t, contrast }.matrix()
            }
        }
    }
}

/// c(x, t) = χ(x)·(re + i im).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CSpec {
    Zero,
    Bump { re: f64, im: f64 },
}

/// α_k(x, t) = χ(x)·(re + i im).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSpec {
    pub k: u32,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub bump: Bump,
    pub a1: ContrastProfile,
    pub b: BSpec,
    pub c: CSpec,
    pub alphas: Vec<AlphaSpec>,
    /// Ellipticity constant checked by `validate`.
    pub theta: f64,
}

impl CoefficientSet {
    pub fn free(bump: Bump) -> Self {
        CoefficientSet {
            bump,
            a1: ContrastProfile::Identity,
            b: BSpec::Identity,
            c: CSpec::Zero,
            alphas: vec![],
            theta: 1.0,
        }
    }

    pub fn a1(&self, x: Point) -> Mat2 {
        add(identity(), self.k1(x))
    }

    /// A₁ − I.
    pub fn k1(&self, x: Point) -> Mat2 {
        scale(self.a1.matrix(), self.bump.value(x))
    }

    /// ∂ₓ(A₁ − I), ∂ᵧ(A₁ − I).
    pub fn k1_grad(&self, x: Point) -> [Mat2; 2] {
        let g = self.bump.grad(x);
        let k = self.a1.matrix();
        [scale(k, g[0]), scale(k, g[1])]
    }

    /// A₂ − I = χ(x)(B(t) − I).
    pub fn k2(&self, x: Point, t: f64) -> Mat2 {
        scale(self.b.contrast(t), self.bump.value(x))
    }

    pub fn k2_grad(&self, x: Point, t: f64) -> [Mat2; 2] {
        let g = self.bump.grad(x);
        let k = self.b.contrast(t);
        [scale(k, g[0]), scale(k, g[1])]
    }

    pub fn c(&self, x: Point, _t: f64) -> Complex64 {
        match self.c {
            CSpec::Zero => ZERO,
            CSpec::Bump { re, im } => Complex64::new(re, im) * self.bump.value(x),
        }
    }

    pub fn alpha(&self, k: u32, x: Point, _t: f64) -> Complex64 {
        let chi = self.bump.value(x);
        self.alphas.iter().filter(|a| a.k == k).map(|a| Complex64::new(a.re, a.im) * chi).sum()
    }

    /// Largest k with a nonzero α_k, or 1 when the problem is linear.
    pub fn l0(&self) -> u32 {
        self.alphas.iter().filter(|a| a.re != 0.0 || a.im != 0.0).map(|a| a.k).max().unwrap_or(1)
    }

    pub fn is_linear(&self) -> bool {
        self.l0() < 2
    }

    /// Hermitian symmetry, ellipticity on random ξ at grid nodes, support in D
    /// and 2 ≤ k ≤ 6 for every α_k.
    pub fn validate(&self, d: &Region, grid: &Grid2D, seed: u64) -> Result<()> {
        if !(self.theta > 0.0) {
            return Err(Error::Validation("ellipticity constant must be positive".into()));
        }
        if self.alphas.iter().any(|a| a.k < 2 || a.k > 6) {
            return Err(Error::Validation("nonlinearity powers must lie in 2..=6".into()));
        }
        if !(self.bump.radius > 0.0) {
            return Err(Error::Validation("bump radius must be positive".into()));
        }
        if d.signed_distance(self.bump.center) > -self.bump.radius {
            return Err(Error::Validation("coefficient support is not inside D".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let times: Vec<f64> = (0..=4).map(|k| grid.t_end * k as f64 / 4.0).collect();
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let x = grid.point(i, j);
                let chi = self.bump.value(x);
                if chi > 0.0 && !d.contains(x) {
                    return Err(Error::Validation(format!("coefficient support leaves D at {x:?}")));
                }
                if chi == 0.0 {
                    continue;
                }
                let mut mats = vec![self.a1(x)];
                mats.extend(times.iter().map(|&t| add(identity(), self.k2(x, t))));
                for m in &mats {
                    if hermitian_defect(m) > 1e-14 {
                        return Err(Error::Validation(format!("coefficient matrix is not Hermitian at {x:?}")));
                    }
                    if min_eig_hermitian(m) < self.theta * (1.0 - 1e-12) {
                        return Err(Error::Validation(format!("ellipticity below {} at {x:?}", self.theta)));
                    }
                    let xi = [
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    ];
                    let q: Complex64 = (0..2)
                        .flat_map(|a| (0..2).map(move |b| (a, b)))
                        .map(|(a, b)| xi[a].conj() * m[a][b] * xi[b])
                        .sum();
                    let n2 = xi[0].norm_sqr() + xi[1].norm_sqr();
                    if q.re < self.theta * n2 * (1.0 - 1e-12) {
                        return Err(Error::Validation(format!("ellipticity fails for a sampled direction at {x:?}")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_gradient_matches_differences() {
        let b = Bump { center: [0.5, 0.5], radius: 0.4 };
        for x in [[0.6, 0.55], [0.3, 0.7], [0.5, 0.1]] {
            let h = 1e-6;
            let g = b.grad(x);
            let fx = (b.value([x[0] + h, x[1]]) - b.value([x[0] - h, x[1]])) / (2.0 * h);
            let fy = (b.value([x[0], x[1] + h]) - b.value([x[0], x[1] - h])) / (2.0 * h);
            assert!((g[0] - fx).abs() < 1e-7 && (g[1] - fy).abs() < 1e-7);
        }
        assert_eq!(b.value([0.5, 0.5]), 1.0);
        assert_eq!(b.value([0.95, 0.5]), 0.0);
    }

    #[test]
    fn rotation_profile_is_hermitian_with_eigenvalues_pm_contrast() {
        let m = ContrastProfile::HermitianRotation { angle: 0.7, contrast: 0.2 }.matrix();
        assert!(hermitian_defect(&m) < 1e-16);
        assert!((min_eig_hermitian(&m) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn validation_catches_leaking_support() {
        let d = Region::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] };
        let g = Grid2D::new([-0.5, -0.5], [1.5, 1.5], 41, 41, 0.1, 1.0).unwrap();
        let mut c = CoefficientSet::free(Bump { center: [0.5, 0.5], radius: 0.45 });
        c.a1 = ContrastProfile::HermitianRotation { angle: 0.3, contrast: 0.2 };
        c.theta = 0.8;
        c.validate(&d, &g, 1).unwrap();
        c.theta = 0.9;
        assert!(c.validate(&d, &g, 1).is_err());
        c.theta = 0.8;
        c.bump.radius = 0.6;
        assert!(c.validate(&d, &g, 1).is_err());
        c.bump.radius = 0.45;
        c.alphas.push(AlphaSpec { k: 9, re: 1.0, im: 0.0 });
        assert!(c.validate(&d, &g, 1).is_err());
    }
}
