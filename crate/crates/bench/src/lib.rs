//! Workloads shared by the criterion benches and the smoke acceptance run.

use gradamp::amplify::{holder_c1half_norm, FieldSamples, DEFAULT_PAIR_BUDGET};
use gradamp::geometry::{place_centers, Region, SetExpr};
use gradamp::herglotz::{ball_collocation, domain_collocation, fit_kernel, FitTarget, HerglotzKernel};
use gradamp::schrodinger::{
    solve_linear_ibvp, Boundary, Bump, CoefficientSet, ComplexField, ContrastProfile, Grid2D, SolveOptions,
};
use gradamp::specialfn::bessel_j;
use gradamp::transmission::TransmissionMode;
use gradamp::{Complex64, Result};

/// Σ J_ν(x) over ν = 0..20 and 200 points in (0, 40].
pub fn bessel_sweep() -> Result<f64> {
    let mut s = 0.0;
    for nu in 0..=20 {
        for i in 1..=200 {
            s += bessel_j(nu as f64, 0.2 * i as f64)?;
        }
    }
    Ok(s)
}

/// The two-ball target of the demo geometry.
pub fn demo_target() -> Result<FitTarget> {
    let d = Region::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] };
    let sites = place_centers(&[[1.0, 0.5], [0.0, 0.5]], 0.3, &d, None)?;
    let mut sets = sites
        .centers_y
        .iter()
        .map(|y| TransmissionMode::new_2d(6, 0.3, *y).and_then(|m| ball_collocation(&m, 20, 64, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    sets.push(domain_collocation(&d, 0.3, 0.075, 1000.0)?);
    Ok(FitTarget::new(sets))
}

pub fn fit(target: &FitTarget, n_nodes: usize) -> Result<HerglotzKernel> {
    Ok(fit_kernel(target, n_nodes, 1e-10)?.0)
}

/// Ten Crank–Nicolson steps with a Hermitian contrast on an n×n grid.
pub fn cn_steps(n: usize) -> Result<ComplexField> {
    let g = Grid2D::new([-1.0, -1.0], [2.0, 2.0], n, n, 0.01, 0.1)?;
    let mut c = CoefficientSet::free(Bump::inside(&Region::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] }, 0.9)?);
    c.a1 = ContrastProfile::HermitianRotation { angle: 0.6, contrast: 0.2 };
    let phi = ComplexField::from_fn(&g, 0.0, |p| {
        let r2 = (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2);
        Complex64::from_polar((-r2 / 0.02).exp(), 3.0 * p[0])
    });
    Ok(solve_linear_ibvp(&c, &g, &phi, &Boundary::Zero, &SolveOptions::default())?.last)
}

/// C^{1,½} estimate of a fitted field on a disk sampled at spacing h.
pub fn holder(kernel: &HerglotzKernel, h: f64) -> Result<f64> {
    let disk: SetExpr = Region::Disk { center: [1.6, 0.5], radius: 0.9 }.into();
    let s = FieldSamples::from_fn(&disk, h, |p| {
        let j = kernel.jet2(p);
        (j.v, [j.dx, j.dy])
    })?;
    holder_c1half_norm(&s, DEFAULT_PAIR_BUDGET)
}
