//! Crank–Nicolson solvers for the linear and nonlinear Schrödinger problems
//! on rectangular 2D grids, with the source terms of the u₀ + 𝒰 splitting.

mod coeffs;
mod diagnostics;
mod operator;
mod solvers;
mod sources;

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::herglotz::SampleGrid;

pub use coeffs::{AlphaSpec, BSpec, Bump, CSpec, CoefficientSet, ContrastProfile, Mat2};
pub use diagnostics::{mass_and_energy_diagnostics, Diagnostics};
pub use operator::{bicgstab, Operator, SolveStats};
pub use solvers::{
    solve_linear_auxiliary, solve_linear_ibvp, solve_nonlinear_auxiliary, solve_nonlinear_cauchy, Boundary,
    SolveOptions, StepRecord, Trajectory,
};
pub use sources::{
    assemble_f1, assemble_f2, assemble_hat_c, binomial, eval_hat_n, nonlinearity, SourceTerm, U0Samples,
};

/// Node grid on a rectangle with spacing width/(nx−1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub min: Point,
    pub max: Point,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub dt: f64,
    pub t_end: f64,
    pub n_steps: usize,
}

impl Grid2D {
    pub fn new(min: Point, max: Point, nx: usize, ny: usize, dt: f64, t_end: f64) -> Result<Self> {
        if nx < 16 || ny < 16 {
            return Err(Error::Validation(format!("grid needs at least 16 nodes per side, got {nx}×{ny}")));
        }
        if !(max[0] > min[0] && max[1] > min[1]) {
            return Err(Error::Validation("grid box is empty".into()));
        }
        if !(dt > 0.0) || !(t_end > 0.0) {
            return Err(Error::Validation("dt and T must be positive".into()));
        }
        let steps = t_end / dt;
        let n_steps = steps.round() as usize;
        if (steps - n_steps as f64).abs() > 1e-9 * steps.max(1.0) || n_steps == 0 {
            return Err(Error::Validation(format!("T/dt = {steps} is not an integer")));
        }
        Ok(Grid2D {
            min,
            max,
            nx,
            ny,
            dx: (max[0] - min[0]) / (nx - 1) as f64,
            dy: (max[1] - min[1]) / (ny - 1) as f64,
            dt,
            t_end,
            n_steps,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn x(&self, i: usize) -> f64 {
        self.min[0] + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.min[1] + j as f64 * self.dy
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        [self.x(i), self.y(j)]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    pub fn sample_grid(&self) -> SampleGrid {
        SampleGrid { x0: self.min[0], y0: self.min[1], dx: self.dx, dy: self.dy, nx: self.nx, ny: self.ny }
    }
}

/// Complex values on a grid, index i·ny + j.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub t: f64,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &Grid2D, t: f64) -> Self {
        Self::from_values(grid, t, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn from_values(grid: &Grid2D, t: f64, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.len());
        ComplexField { nx: grid.nx, ny: grid.ny, x0: grid.min[0], y0: grid.min[1], dx: grid.dx, dy: grid.dy, t, values }
    }

    pub fn from_fn(grid: &Grid2D, t: f64, f: impl Fn(Point) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                values.push(f(grid.point(i, j)));
            }
        }
        Self::from_values(grid, t, values)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.ny + j]
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        [self.x0 + i as f64 * self.dx, self.y0 + j as f64 * self.dy]
    }

    pub fn conforms(&self, grid: &Grid2D) -> bool {
        self.nx == grid.nx
            && self.ny == grid.ny
            && self.values.len() == grid.len()
            && (self.x0 - grid.min[0]).abs() <= 1e-12 * (1.0 + grid.min[0].abs())
            && (self.y0 - grid.min[1]).abs() <= 1e-12 * (1.0 + grid.min[1].abs())
            && (self.dx - grid.dx).abs() <= 1e-12 * grid.dx
            && (self.dy - grid.dy).abs() <= 1e-12 * grid.dy
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Discrete L² norm (Σ|u|² dx dy)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx * self.dy).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Central-difference gradient at an interior node.
    pub fn grad(&self, i: usize, j: usize) -> [Complex64; 2] {
        let gx = (self.get(i + 1, j) - self.get(i - 1, j)) / (2.0 * self.dx);
        let gy = (self.get(i, j + 1) - self.get(i, j - 1)) / (2.0 * self.dy);
        [gx, gy]
    }

    pub fn to_snapshot_string(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 48 + 128);
        let _ = writeln!(
            s,
            "{} {} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            self.nx, self.ny, self.x0, self.y0, self.dx, self.dy, self.t
        );
        for i in 0..self.nx {
            for j in 0..self.ny {
                let z = self.get(i, j);
                let _ = writeln!(s, "{i} {j} {:.17e} {:.17e}", z.re, z.im);
            }
        }
        s
    }

    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_snapshot_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_snapshot(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_snapshot_str(&text)
    }

    pub fn from_snapshot_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let head: Vec<&str> =
            lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))?.split_whitespace().collect();
        if head.len() != 7 {
            return Err(Error::Parse("snapshot header needs nx ny x0 y0 dx dy t".into()));
        }
        let pu = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("header: {e}")));
        let pf = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("header: {e}")));
        let (nx, ny) = (pu(head[0])?, pu(head[1])?);
        let mut f = ComplexField {
            nx,
            ny,
            x0: pf(head[2])?,
            y0: pf(head[3])?,
            dx: pf(head[4])?,
            dy: pf(head[5])?,
            t: pf(head[6])?,
            values: vec![Complex64::new(0.0, 0.0); nx * ny],
        };
        let mut seen = 0;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let p: Vec<&str> = line.split_whitespace().collect();
            if p.len() != 4 {
                return Err(Error::Parse(format!("bad snapshot row '{line}'")));
            }
            let (i, j) = (pu(p[0])?, pu(p[1])?);
            if i >= nx || j >= ny {
                return Err(Error::Parse(format!("row index ({i}, {j}) out of range")));
            }
            f.values[i * ny + j] = Complex64::new(pf(p[2])?, pf(p[3])?);
            seen += 1;
        }
        if seen != nx * ny {
            return Err(Error::Parse(format!("snapshot has {seen} rows, expected {}", nx * ny)));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_non_integral_steps() {
        assert!(Grid2D::new([0.0, 0.0], [1.0, 1.0], 17, 17, 0.3, 1.0).is_err());
        let g = Grid2D::new([0.0, 0.0], [1.0, 2.0], 17, 33, 0.1, 1.0).unwrap();
        assert_eq!(g.n_steps, 10);
        assert!((g.dx - 1.0 / 16.0).abs() < 1e-15 && (g.dy - g.dx).abs() < 1e-15);
        assert!(Grid2D::new([0.0, 0.0], [1.0, 1.0], 8, 17, 0.1, 1.0).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let g = Grid2D::new([-1.0, 0.5], [1.0, 2.0], 16, 19, 0.1, 1.0).unwrap();
        let f = ComplexField::from_fn(&g, 0.7, |p| Complex64::new(p[0].sin() * 1e-7, p[1].exp()));
        let back = ComplexField::from_snapshot_str(&f.to_snapshot_string()).unwrap();
        assert_eq!(back, f);
    }
}
