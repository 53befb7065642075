//! One Crank–Nicolson engine for all four problems:
//!   i∂ₜu + L(t)u + G(u, t) = S(t),
//! with L frozen at t + dt/2, G and S trapezoidal, and Picard iteration on G.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coeffs::CoefficientSet;
use super::operator::{bicgstab, Operator};
use super::sources::{hat_c_from, hat_n_from, HatC, SourceTerm, U0Samples};
use super::{ComplexField, Grid2D};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Dirichlet data on the box boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Zero,
    /// ψ(x, t) = spatial(x)·e^{−iωt}; only boundary entries of `spatial` are read.
    Harmonic {
        spatial: Vec<Complex64>,
        omega: f64,
    },
}

impl Boundary {
    fn fill(&self, grid: &Grid2D, t: f64, out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = ZERO);
        if let Boundary::Harmonic { spatial, omega } = self {
            let f = Complex64::from_polar(1.0, -omega * t);
            for i in 0..grid.nx {
                for j in 0..grid.ny {
                    if grid.is_boundary(i, j) {
                        let k = grid.idx(i, j);
                        out[k] = spatial[k] * f;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Keep every `stride`-th step as a snapshot (step 0 included).
    pub stride: usize,
    /// Relative residual for each linear solve.
    pub tol: f64,
    /// Iteration cap; defaults to 10·(nx + ny).
    pub max_iter: Option<usize>,
    pub picard_tol: f64,
    pub picard_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { stride: 1, tol: 1e-10, max_iter: None, picard_tol: 1e-11, picard_cap: 25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub linear_iterations: usize,
    pub picard_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid2D,
    pub stride: usize,
    pub snapshots: Vec<ComplexField>,
    /// Field at t = T, stored whether or not the stride hits it.
    pub last: ComplexField,
    pub steps: Vec<StepRecord>,
    /// Discrete L² norm after every step, starting with t = 0.
    pub mass: Vec<f64>,
}

impl Trajectory {
    pub fn max_picard(&self) -> usize {
        self.steps.iter().map(|s| s.picard_iterations).max().unwrap_or(0)
    }

    pub fn max_linear_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.linear_iterations).max().unwrap_or(0)
    }

    /// max_t |‖u(t)‖ − ‖u(0)‖| / ‖u(0)‖.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        if m0 == 0.0 {
            return self.mass.iter().copied().fold(0.0, f64::max);
        }
        self.mass.iter().map(|m| (m - m0).abs() / m0).fold(0.0, f64::max)
    }
}

type SparseFn<'a> = dyn Fn(f64, &[Complex64]) -> Vec<(usize, Complex64)> + 'a;

struct Engine<'a> {
    grid: &'a Grid2D,
    boundary: &'a Boundary,
    operator: &'a dyn Fn(f64) -> Operator,
    time_dependent: bool,
    source: Option<&'a dyn Fn(f64) -> Vec<(usize, Complex64)>>,
    nonlinear: Option<&'a SparseFn<'a>>,
}

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let n: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    if n == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (d / n).sqrt()
    }
}

impl Engine<'_> {
    fn run(&self, phi: &ComplexField, opts: &SolveOptions) -> Result<Trajectory> {
        let g = self.grid;
        let n = g.len();
        let stride = opts.stride.max(1);
        let max_iter = opts.max_iter.unwrap_or(10 * (g.nx + g.ny));
        let h = 0.5 * g.dt;
        let mut u = phi.values.clone();
        let mut snapshots = vec![ComplexField::from_values(g, 0.0, u.clone())];
        let mut steps = Vec::with_capacity(g.n_steps);
        let mut mass = vec![phi.l2_norm()];

        let mut op = (self.operator)(0.5 * g.dt);
        let mut lu = vec![ZERO; n];
        let mut lift = vec![ZERO; n];
        let mut rhs0 = vec![ZERO; n];
        let mut rhs = vec![ZERO; n];
        let mut x = vec![ZERO; n];
        let mut y = vec![ZERO; n];
        let mut full = vec![ZERO; n];
        let mut dinv = Self::dinv(&op, h);

        for step in 0..g.n_steps {
            let (t0, t1) = (g.time(step), g.time(step + 1));
            if self.time_dependent && step > 0 {
                op = (self.operator)(t0 + h);
                dinv = Self::dinv(&op, h);
            }
            let fail = |e: Error| match e {
                Error::SolverDivergence { msg, .. } => Error::SolverDivergence { t: t1, msg },
                other => other,
            };
            // rhs0 = u + ih·L u + ih·L b¹ − ih(S⁰ + S¹) + ih·G(uⁿ, t⁰), interior only.
            op.apply(&u, &mut lu);
            self.boundary.fill(g, t1, &mut lift);
            let mut lb = vec![ZERO; n];
            op.apply(&lift, &mut lb);
            for k in 0..n {
                rhs0[k] = if lu_interior(g, k) { u[k] + I * h * (lu[k] + lb[k]) } else { ZERO };
            }
            if let Some(src) = self.source {
                for (k, s) in src(t0).into_iter().chain(src(t1)) {
                    rhs0[k] -= I * h * s;
                }
            }
            if let Some(nl) = self.nonlinear {
                for (k, v) in nl(t0, &u) {
                    rhs0[k] += I * h * v;
                }
            }
            for k in 0..n {
                x[k] = if lu_interior(g, k) { u[k] } else { ZERO };
            }
            let apply = |v: &[Complex64], out: &mut [Complex64]| {
                op.apply(v, out);
                for k in 0..v.len() {
                    out[k] = v[k] - I * h * out[k];
                }
            };
            let mut lin_iters = 0;
            let mut picard = 0;
            match self.nonlinear {
                None => {
                    let st = bicgstab(apply, &dinv, &rhs0, &mut x, opts.tol, max_iter).map_err(fail)?;
                    lin_iters += st.iterations;
                    picard = 1;
                }
                Some(nl) => loop {
                    for k in 0..n {
                        full[k] = x[k] + lift[k];
                    }
                    rhs.copy_from_slice(&rhs0);
                    for (k, v) in nl(t1, &full) {
                        rhs[k] += I * h * v;
                    }
                    y.copy_from_slice(&x);
                    let st = bicgstab(apply, &dinv, &rhs, &mut y, opts.tol, max_iter).map_err(fail)?;
                    lin_iters += st.iterations;
                    picard += 1;
                    let d = rel_diff(&y, &x);
                    std::mem::swap(&mut x, &mut y);
                    if d <= opts.picard_tol {
                        break;
                    }
                    if picard >= opts.picard_cap {
                        return Err(Error::FixedPointStall { t: t1, iters: picard, last: d });
                    }
                },
            }
            for k in 0..n {
                u[k] = x[k] + lift[k];
            }
            if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::SolverDivergence { t: t1, msg: "non-finite field".into() });
            }
            steps.push(StepRecord { t: t1, linear_iterations: lin_iters, picard_iterations: picard });
            let field = ComplexField::from_values(g, t1, u.clone());
            mass.push(field.l2_norm());
            if (step + 1) % stride == 0 {
                snapshots.push(field);
            }
        }
        let last = ComplexField::from_values(g, g.t_end, u);
        Ok(Trajectory { grid: *g, stride, snapshots, last, steps, mass })
    }

    fn dinv(op: &Operator, h: f64) -> Vec<Complex64> {
        op.diagonal().into_iter().map(|d| if d == ZERO { ZERO } else { 1.0 / (1.0 - I * h * d) }).collect()
    }
}

fn lu_interior(g: &Grid2D, k: usize) -> bool {
    let (i, j) = (k / g.ny, k % g.ny);
    !g.is_boundary(i, j)
}

fn check_field(phi: &ComplexField, grid: &Grid2D) -> Result<()> {
    if !phi.conforms(grid) {
        return Err(Error::Dimension("initial field does not match the grid".into()));
    }
    if !phi.is_finite() {
        return Err(Error::Validation("initial field has non-finite values".into()));
    }
    Ok(())
}

/// i∂ₜu + ∇·(A₁∇u) = 0 with u(0) = φ and u = ψ on the boundary.
pub fn solve_linear_ibvp(
    coeffs: &CoefficientSet,
    grid: &Grid2D,
    phi: &ComplexField,
    psi: &Boundary,
    opts: &SolveOptions,
) -> Result<Trajectory> {
    check_field(phi, grid)?;
    let mut b0 = vec![ZERO; grid.len()];
    psi.fill(grid, 0.0, &mut b0);
    let scale = phi.max_abs().max(1.0);
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            if grid.is_boundary(i, j) && (phi.get(i, j) - b0[grid.idx(i, j)]).norm() > 1e-8 * scale {
                return Err(Error::Validation(format!("initial and boundary data disagree at node ({i}, {j})")));
            }
        }
    }
    let op = Operator::laplacian(grid).with_contrast(grid, |x| coeffs.k1(x));
    let make = move |_t: f64| op.clone();
    Engine { grid, boundary: psi, operator: &make, time_dependent: false, source: None, nonlinear: None }.run(phi, opts)
}

/// i∂ₜ𝒰 + ∇·(A₁∇𝒰) = F₁ with zero initial and boundary data.
pub fn solve_linear_auxiliary(
    coeffs: &CoefficientSet,
    grid: &Grid2D,
    f1: &SourceTerm,
    opts: &SolveOptions,
) -> Result<Trajectory> {
    let samples = U0Samples::new(grid, coeffs, &f1.u0);
    let op = Operator::laplacian(grid).with_contrast(grid, |x| coeffs.k1(x));
    let make = move |_t: f64| op.clone();
    let src = |t: f64| samples.source(f1, t);
    Engine {
        grid,
        boundary: &Boundary::Zero,
        operator: &make,
        time_dependent: false,
        source: Some(&src),
        nonlinear: None,
    }
    .run(&ComplexField::zeros(grid, 0.0), opts)
}

fn support_nodes(grid: &Grid2D, coeffs: &CoefficientSet) -> Vec<(usize, [f64; 2])> {
    let mut out = Vec::new();
    for i in 1..grid.nx - 1 {
        for j in 1..grid.ny - 1 {
            let x = grid.point(i, j);
            if coeffs.bump.value(x) > 0.0 {
                out.push((grid.idx(i, j), x));
            }
        }
    }
    out
}

/// i∂ₜU + ∇·(A₂∇U) + cU + N(U) = 0 on a box with U = u₀ on its boundary.
pub fn solve_nonlinear_cauchy(
    coeffs: &CoefficientSet,
    grid: &Grid2D,
    phi: &ComplexField,
    boundary: &Boundary,
    opts: &SolveOptions,
) -> Result<Trajectory> {
    check_field(phi, grid)?;
    let nodes = support_nodes(grid, coeffs);
    let make = |t: f64| {
        Operator::laplacian(grid)
            .with_contrast(grid, |x| coeffs.k2(x, t))
            .with_potential(nodes.iter().map(|&(k, x)| (k, coeffs.c(x, t))).collect())
    };
    let nl = |t: f64, u: &[Complex64]| -> Vec<(usize, Complex64)> {
        nodes.iter().map(|&(k, x)| (k, super::sources::nonlinearity(coeffs, x, t, u[k]))).collect()
    };
    let time_dependent = !matches!(coeffs.b, super::coeffs::BSpec::Identity | super::coeffs::BSpec::Constant { .. });
    let nonlinear: Option<&SparseFn> = if coeffs.is_linear() { None } else { Some(&nl) };
    Engine { grid, boundary, operator: &make, time_dependent, source: None, nonlinear }.run(phi, opts)
}

/// i∂ₜ𝒰 + ∇·(A₂∇𝒰) + ĉ𝒰 + N̂(𝒰) = F₂ with zero initial and boundary data.
pub fn solve_nonlinear_auxiliary(
    coeffs: &CoefficientSet,
    grid: &Grid2D,
    f2: &SourceTerm,
    hat_c: &HatC,
    opts: &SolveOptions,
) -> Result<Trajectory> {
    let samples = U0Samples::new(grid, coeffs, &hat_c.u0);
    let u0_at = |k: usize, t: f64| samples.jet(k, t).v;
    let make = |t: f64| {
        Operator::laplacian(grid).with_contrast(grid, |x| coeffs.k2(x, t)).with_potential(
            (0..samples.idx.len())
                .map(|k| (samples.idx[k], hat_c_from(coeffs, samples.points[k], t, u0_at(k, t))))
                .collect(),
        )
    };
    let nl = |t: f64, w: &[Complex64]| -> Vec<(usize, Complex64)> {
        (0..samples.idx.len())
            .map(|k| {
                let i = samples.idx[k];
                (i, hat_n_from(coeffs, samples.points[k], t, u0_at(k, t), w[i]))
            })
            .collect()
    };
    let src = |t: f64| samples.source(f2, t);
    let nonlinear: Option<&SparseFn> = if coeffs.is_linear() { None } else { Some(&nl) };
    // ĉ follows u₀(t), so the operator is rebuilt every step.
    Engine { grid, boundary: &Boundary::Zero, operator: &make, time_dependent: true, source: Some(&src), nonlinear }
        .run(&ComplexField::zeros(grid, 0.0), opts)
}
