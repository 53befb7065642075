//! Herglotz wave functions H_g(x) = Σ_j w_j g_j e^{i x·θ_j} (ω = 1), their
//! analytic derivatives, closed-form single-ball kernels and u₀ = H_g e^{−it}.

mod fit;
mod io;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{circle_nodes, sphere_nodes};
use crate::transmission::TransmissionMode;

pub use fit::{
    ball_collocation, domain_collocation, fit_kernel, fit_kernel_sweep, CollocationSet, FitOptions, FitReport,
    FitTarget, LCurvePoint, SetResidual, SolvePath,
};
pub use fit::{objective, residuals};
pub use io::{kernel_from_str, kernel_to_string, read_kernel, write_kernel};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerglotzKernel {
    pub dim: u8,
    /// Unit directions, `dim` components per node.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub coeffs: Vec<Complex64>,
    pub omega: f64,
}

/// Value and derivatives up to second order of a 2D field at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet2 {
    pub v: Complex64,
    pub dx: Complex64,
    pub dy: Complex64,
    pub dxx: Complex64,
    pub dxy: Complex64,
    pub dyy: Complex64,
}

impl Jet2 {
    pub fn scale(self, s: Complex64) -> Jet2 {
        Jet2 {
            v: self.v * s,
            dx: self.dx * s,
            dy: self.dy * s,
            dxx: self.dxx * s,
            dxy: self.dxy * s,
            dyy: self.dyy * s,
        }
    }

    pub fn laplacian(&self) -> Complex64 {
        self.dxx + self.dyy
    }
}

/// Partial derivatives ∂^α H for all |α| ≤ max_order, graded order.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub dim: u8,
    pub max_order: u32,
    pub index: Vec<Vec<u32>>,
    pub values: Vec<Complex64>,
}

impl Derivatives {
    pub fn get(&self, alpha: &[u32]) -> Option<Complex64> {
        self.index.iter().position(|a| a == alpha).map(|k| self.values[k])
    }
}

fn multi_indices(dim: u8, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for order in 0..=max_order {
        let mut stack = vec![(Vec::<u32>::new(), order)];
        while let Some((prefix, left)) = stack.pop() {
            if prefix.len() + 1 == dim as usize {
                let mut a = prefix.clone();
                a.push(left);
                out.push(a);
                continue;
            }
            for k in 0..=left {
                let mut a = prefix.clone();
                a.push(k);
                stack.push((a, left - k));
            }
        }
    }
    out
}

/// Uniform grid description for fast sampling: x_i = x0 + i dx, y_j = y0 + j dy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl HerglotzKernel {
    pub fn new(dim: u8, nodes: Vec<f64>, weights: Vec<f64>, coeffs: Vec<Complex64>) -> Result<Self> {
        let k = HerglotzKernel { dim, nodes, weights, coeffs, omega: 1.0 };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::Dimension(format!("kernel dimension must be 2 or 3, got {}", self.dim)));
        }
        let n = self.weights.len();
        if self.nodes.len() != n * self.dim as usize || self.coeffs.len() != n {
            return Err(Error::Dimension("node, weight and coefficient counts differ".into()));
        }
        if self.omega != 1.0 {
            return Err(Error::Validation(format!("omega must be 1, got {}", self.omega)));
        }
        for j in 0..n {
            let len2: f64 = self.node(j).iter().map(|c| c * c).sum();
            if (len2.sqrt() - 1.0).abs() > 1e-14 {
                return Err(Error::Validation(format!("node {j} is not a unit vector")));
            }
            if !(self.weights[j] > 0.0) {
                return Err(Error::Validation(format!("weight {j} is not positive")));
            }
            if !self.coeffs[j].re.is_finite() || !self.coeffs[j].im.is_finite() {
                return Err(Error::Validation(format!("coefficient {j} is not finite")));
            }
        }
        Ok(())
    }

    /// Trapezoid (2D) or Gauss–Legendre × trapezoid (3D) nodes with g ≡ 0.
    pub fn zeros(dim: u8, n_nodes: usize) -> Result<Self> {
        match dim {
            2 => {
                let (nodes, weights) = circle_nodes(n_nodes);
                Ok(HerglotzKernel {
                    dim,
                    nodes: nodes.into_iter().flatten().collect(),
                    weights,
                    coeffs: vec![Complex64::new(0.0, 0.0); n_nodes],
                    omega: 1.0,
                })
            }
            3 => {
                // n_nodes ≈ n_θ · 2n_θ
                let nt = ((n_nodes as f64 / 2.0).sqrt().round() as usize).max(1);
                let (nodes, weights) = sphere_nodes(nt, 2 * nt);
                let n = weights.len();
                Ok(HerglotzKernel {
                    dim,
                    nodes: nodes.into_iter().flatten().collect(),
                    weights,
                    coeffs: vec![Complex64::new(0.0, 0.0); n],
                    omega: 1.0,
                })
            }
            _ => Err(Error::Dimension(format!("kernel dimension must be 2 or 3, got {dim}"))),
        }
    }

    /// Constant density g ≡ c.
    pub fn constant(dim: u8, n_nodes: usize, c: Complex64) -> Result<Self> {
        let mut k = Self::zeros(dim, n_nodes)?;
        k.coeffs.iter_mut().for_each(|g| *g = c);
        Ok(k)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, j: usize) -> &[f64] {
        let d = self.dim as usize;
        &self.nodes[j * d..(j + 1) * d]
    }

    /// Products w_j g_j.
    pub fn weighted(&self) -> Vec<Complex64> {
        self.coeffs.iter().zip(&self.weights).map(|(g, w)| g * w).collect()
    }

    /// Σ_j w_j |g_j|, the natural scale for rounding in H_g.
    pub fn l1_scale(&self) -> f64 {
        self.coeffs.iter().zip(&self.weights).map(|(g, w)| g.norm() * w).sum()
    }

    /// Discrete L²(S^{d−1}) norm of g.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().zip(&self.weights).map(|(g, w)| g.norm_sqr() * w).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut k = self.clone();
        k.coeffs.iter_mut().for_each(|g| *g *= s);
        k
    }

    /// Multiplies g_j by e^{−i y·θ_j}, which translates H_g by y.
    pub fn translated(&self, y: &[f64]) -> Result<Self> {
        if y.len() != self.dim as usize {
            return Err(Error::Dimension("translation vector has the wrong dimension".into()));
        }
        let mut k = self.clone();
        for j in 0..self.len() {
            let phase: f64 = self.node(j).iter().zip(y).map(|(a, b)| a * b).sum();
            k.coeffs[j] *= Complex64::from_polar(1.0, -phase);
        }
        Ok(k)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim as usize {
            return Err(Error::Dimension(format!("point has {} coordinates, expected {}", x.len(), self.dim)));
        }
        Ok(())
    }

    /// H_g(x).
    pub fn eval_h(&self, x: &[f64]) -> Result<Complex64> {
        self.check_point(x)?;
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..self.len() {
            let phase: f64 = self.node(j).iter().zip(x).map(|(a, b)| a * b).sum();
            s += self.coeffs[j] * self.weights[j] * Complex64::from_polar(1.0, phase);
        }
        Ok(s)
    }

    /// ∂^α H_g(x) for all |α| ≤ max_order ≤ 3.
    pub fn eval_h_derivs(&self, x: &[f64], max_order: u32) -> Result<Derivatives> {
        self.check_point(x)?;
        if max_order > 3 {
            return Err(Error::Domain(format!("derivative order {max_order} exceeds 3")));
        }
        let index = multi_indices(self.dim, max_order);
        let mut values = vec![Complex64::new(0.0, 0.0); index.len()];
        for j in 0..self.len() {
            let th = self.node(j);
            let phase: f64 = th.iter().zip(x).map(|(a, b)| a * b).sum();
            let base = self.coeffs[j] * self.weights[j] * Complex64::from_polar(1.0, phase);
            for (a, val) in index.iter().zip(values.iter_mut()) {
                let mut f = base;
                for (k, &p) in a.iter().enumerate() {
                    for _ in 0..p {
                        f *= I * th[k];
                    }
                }
                *val += f;
            }
        }
        Ok(Derivatives { dim: self.dim, max_order, index, values })
    }

    /// (H, ∇H) at x.
    pub fn eval_h_grad(&self, x: &[f64]) -> Result<(Complex64, Vec<Complex64>)> {
        self.check_point(x)?;
        let d = self.dim as usize;
        let mut v = Complex64::new(0.0, 0.0);
        let mut g = vec![Complex64::new(0.0, 0.0); d];
        for j in 0..self.len() {
            let th = self.node(j);
            let phase: f64 = th.iter().zip(x).map(|(a, b)| a * b).sum();
            let base = self.coeffs[j] * self.weights[j] * Complex64::from_polar(1.0, phase);
            v += base;
            for k in 0..d {
                g[k] += base * I * th[k];
            }
        }
        Ok((v, g))
    }

    /// Value and derivatives to second order of a 2D kernel.
    pub fn jet2(&self, x: [f64; 2]) -> Jet2 {
        debug_assert_eq!(self.dim, 2);
        let mut out = Jet2::default();
        for j in 0..self.len() {
            let (tx, ty) = (self.nodes[2 * j], self.nodes[2 * j + 1]);
            let base = self.coeffs[j] * self.weights[j] * Complex64::from_polar(1.0, tx * x[0] + ty * x[1]);
            out.v += base;
            out.dx += base * I * tx;
            out.dy += base * I * ty;
            out.dxx -= base * (tx * tx);
            out.dxy -= base * (tx * ty);
            out.dyy -= base * (ty * ty);
        }
        out
    }

    /// ∂_x^a ∂_y^b H_g on a uniform 2D grid, stored with index i·ny + j.
    ///
    /// Uses e^{i(xθx+yθy)} = e^{ixθx} e^{iyθy} so each grid line costs one
    /// exponential per node.
    pub fn sample_grid(&self, grid: &SampleGrid, a: u32, b: u32) -> Vec<Complex64> {
        debug_assert_eq!(self.dim, 2);
        let n = self.len();
        let coef: Vec<Complex64> = (0..n)
            .map(|j| {
                let (tx, ty) = (self.nodes[2 * j], self.nodes[2 * j + 1]);
                self.coeffs[j] * self.weights[j] * (I * tx).powu(a) * (I * ty).powu(b)
            })
            .collect();
        let ey: Vec<Complex64> = (0..grid.ny)
            .flat_map(|jy| {
                let y = grid.y0 + jy as f64 * grid.dy;
                (0..n).map(move |j| (j, y))
            })
            .map(|(j, y)| Complex64::from_polar(1.0, y * self.nodes[2 * j + 1]))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); grid.nx * grid.ny];
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        for ix in 0..grid.nx {
            let x = grid.x0 + ix as f64 * grid.dx;
            for j in 0..n {
                row[j] = coef[j] * Complex64::from_polar(1.0, x * self.nodes[2 * j]);
            }
            for jy in 0..grid.ny {
                let e = &ey[jy * n..(jy + 1) * n];
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    s += row[j] * e[j];
                }
                out[ix * grid.ny + jy] = s;
            }
        }
        out
    }

    /// Value, gradient and Laplacian jets on a grid.
    pub fn sample_grid_jets(&self, grid: &SampleGrid) -> Vec<Jet2> {
        let v = self.sample_grid(grid, 0, 0);
        let dx = self.sample_grid(grid, 1, 0);
        let dy = self.sample_grid(grid, 0, 1);
        let dxx = self.sample_grid(grid, 2, 0);
        let dxy = self.sample_grid(grid, 1, 1);
        let dyy = self.sample_grid(grid, 0, 2);
        (0..v.len()).map(|k| Jet2 { v: v[k], dx: dx[k], dy: dy[k], dxx: dxx[k], dxy: dxy[k], dyy: dyy[k] }).collect()
    }
}

/// g(θ) = β e^{imθ} e^{−i y·θ}/(2π i^m) on trapezoid nodes; by Jacobi–Anger
/// H_g(x) = β J_m(|x−y|) e^{imθ_{x−y}} up to quadrature error.
pub fn exact_single_ball_kernel_2d(mode: &TransmissionMode, n_nodes: usize) -> Result<HerglotzKernel> {
    if mode.dim != 2 {
        return Err(Error::Dimension("closed-form kernels exist only in 2D".into()));
    }
    let beta = mode.beta();
    if !beta.is_finite() {
        return Err(Error::Domain(format!("beta overflows for m = {}, r0 = {}", mode.m, mode.r0)));
    }
    let mut k = HerglotzKernel::zeros(2, n_nodes)?;
    let im = I.powu(mode.m);
    let y = &mode.center;
    for j in 0..n_nodes {
        // m·θ_j reduced exactly through the node index keeps the phase small.
        let mj = (mode.m as usize * j) % n_nodes;
        let phase = 2.0 * PI * mj as f64 / n_nodes as f64 - (y[0] * k.nodes[2 * j] + y[1] * k.nodes[2 * j + 1]);
        k.coeffs[j] = Complex64::from_polar(beta / (2.0 * PI), phase) / im;
    }
    Ok(k)
}

/// u₀(x,t) = H_g(x) e^{−it}, the free solution built from a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct U0 {
    pub kernel: HerglotzKernel,
}

pub fn make_u0(kernel: HerglotzKernel) -> U0 {
    U0 { kernel }
}

impl U0 {
    pub fn time_factor(t: f64) -> Complex64 {
        Complex64::from_polar(1.0, -t)
    }

    pub fn value(&self, x: &[f64], t: f64) -> Result<Complex64> {
        Ok(self.kernel.eval_h(x)? * Self::time_factor(t))
    }

    /// ∂_t u₀ = −i u₀.
    pub fn dt(&self, x: &[f64], t: f64) -> Result<Complex64> {
        Ok(-I * self.value(x, t)?)
    }

    pub fn derivs(&self, x: &[f64], t: f64, max_order: u32) -> Result<Derivatives> {
        let mut d = self.kernel.eval_h_derivs(x, max_order)?;
        let f = Self::time_factor(t);
        d.values.iter_mut().for_each(|v| *v *= f);
        Ok(d)
    }

    pub fn jet2(&self, x: [f64; 2], t: f64) -> Jet2 {
        self.kernel.jet2(x).scale(Self::time_factor(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 3).len(), 10);
        assert_eq!(multi_indices(3, 3).len(), 20);
        assert_eq!(multi_indices(2, 1), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn zero_kernel_gives_zero() {
        let k = HerglotzKernel::zeros(2, 32).unwrap();
        assert_eq!(k.eval_h(&[0.3, -1.0]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn grid_sampling_matches_pointwise() {
        let mut k = HerglotzKernel::zeros(2, 40).unwrap();
        for (j, g) in k.coeffs.iter_mut().enumerate() {
            *g = Complex64::new((j as f64).sin(), (0.3 * j as f64).cos());
        }
        let grid = SampleGrid { x0: -1.0, y0: 0.5, dx: 0.1, dy: 0.2, nx: 7, ny: 5 };
        let s = k.sample_grid(&grid, 1, 2);
        for ix in 0..7 {
            for jy in 0..5 {
                let x = [-1.0 + 0.1 * ix as f64, 0.5 + 0.2 * jy as f64];
                let d = k.eval_h_derivs(&x, 3).unwrap().get(&[1, 2]).unwrap();
                assert!((s[ix * 5 + jy] - d).norm() < 1e-12 * k.l1_scale());
            }
        }
    }

    #[test]
    fn validation_rejects_bad_nodes() {
        let k = HerglotzKernel::new(2, vec![1.0, 0.1], vec![1.0], vec![Complex64::new(1.0, 0.0)]);
        assert!(k.is_err());
        assert!(HerglotzKernel::zeros(4, 10).is_err());
    }
}
