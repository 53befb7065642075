use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, Point, Region};
use crate::transmission::{min_mode_order, peak_lower_bound_2d};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Linear,
    Nonlinear,
}

/// Empirical stand-ins for the constants C₁ … C₆.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { c1: 1.0, c2: 1.0, c3: 1.0, c4: 1.0, c5: 1.0, c6: 1.0 }
    }
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("c1", self.c1), ("c2", self.c2), ("c3", self.c3), ("c4", self.c4), ("c5", self.c5), ("c6", self.c6)]
        {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("constant {name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub problem: Problem,
    pub dim: u8,
    pub m_target: f64,
    pub r0: f64,
    pub eps: f64,
    pub m: u32,
    pub constants: Constants,
    /// The terms whose minimum is r₀, in formula order.
    pub r0_terms: Vec<f64>,
    /// The terms whose minimum is ε, in formula order.
    pub eps_terms: Vec<f64>,
}

impl ConstructionParams {
    /// Fails when the fitter could not reach the residual the formulas ask for.
    pub fn check_achieved(&self, eps_hat: f64) -> Result<()> {
        if eps_hat > self.eps {
            return Err(Error::FitInfeasible(format!(
                "achieved residual {eps_hat:.3e} exceeds the required eps = {:.3e}",
                self.eps
            )));
        }
        Ok(())
    }

    /// Replaces r₀ and re-derives m for it; ε is unchanged.
    pub fn with_r0(mut self, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::Validation(format!("r0 must be positive, got {r0}")));
        }
        self.r0 = r0;
        self.m = mode_order(self.dim, self.problem, r0, self.eps, self.m_target, &self.constants)?;
        Ok(self)
    }
}

fn mode_order(dim: u8, problem: Problem, r0: f64, eps: f64, m_target: f64, c: &Constants) -> Result<u32> {
    let m_min = min_mode_order(r0)?;
    Ok(match (dim, problem) {
        (3, Problem::Linear) => ((512.0 * r0.powi(3)).floor() as u32 + 1).max(m_min),
        (3, Problem::Nonlinear) => {
            let lead = ((256.0 * (2.0 + c.c2 * eps).powi(2) * r0.powi(3) - 3.0) / 2.0).floor() + 1.0;
            (lead.max(0.0) as u32).max(m_min)
        }
        (_, Problem::Linear) => m_rule_2d(r0, (c.c1 + c.c2) * eps, m_target, m_min)?,
        (_, Problem::Nonlinear) => m_rule_2d(r0, c.c2 * eps, m_target, m_min)?,
    })
}

fn boundary_samples(d: &Region, n: usize) -> Vec<Point> {
    let lerp = |a: Point, b: Point, s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
    let polyline = |v: &[Point]| {
        let per = n / v.len() + 1;
        let mut out = Vec::new();
        for i in 0..v.len() {
            for k in 0..per {
                out.push(lerp(v[i], v[(i + 1) % v.len()], k as f64 / per as f64));
            }
        }
        out
    };
    match d {
        Region::Disk { center, radius } => (0..n)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / n as f64;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            })
            .collect(),
        Region::Rectangle { min, max } => polyline(&[*min, [max[0], min[1]], *max, [min[0], max[1]]]),
        Region::Polygon { vertices } => polyline(vertices),
        Region::Offset { base, .. } => boundary_samples(base, n),
    }
}

/// dist(D, ∂Ω) for D ⊂ Ω, from dense samples of ∂D (exact at polygon
/// vertices; an offset region loses exactly its offset for convex Ω).
pub fn dist_to_boundary(d: &Region, omega: &Region) -> Result<f64> {
    let shrink = match d {
        Region::Offset { delta, .. } => *delta,
        _ => 0.0,
    };
    let depth =
        boundary_samples(d, 4096).iter().map(|p| -omega.signed_distance(*p)).fold(f64::INFINITY, f64::min) - shrink;
    if !(depth > 0.0) {
        return Err(Error::Validation("D must lie strictly inside Omega".into()));
    }
    Ok(depth)
}

/// Smallest m ≥ m_min with √(2m+2) r₀^{−1}/(2√(2π)) − loss ≥ 6r₀(𝓜+1).
fn m_rule_2d(r0: f64, loss: f64, m_target: f64, m_min: u32) -> Result<u32> {
    let need = 6.0 * r0 * (m_target + 1.0) + loss;
    let q = 2.0 * (2.0 * std::f64::consts::PI).sqrt() * r0 * need;
    let guess = ((q * q - 2.0) / 2.0).ceil().max(0.0);
    if guess > u32::MAX as f64 / 2.0 {
        return Err(Error::ScanLimit(format!("2D mode order {guess:e} does not fit")));
    }
    let mut m = (guess as u32).max(m_min).max(1);
    while m > m_min && peak_lower_bound_2d(m - 1, r0) - loss >= 6.0 * r0 * (m_target + 1.0) {
        m -= 1;
    }
    while peak_lower_bound_2d(m, r0) - loss < 6.0 * r0 * (m_target + 1.0) {
        m += 1;
    }
    Ok(m)
}

/// r₀, ε and m from the amplification target and the geometry.
///
/// `omega = Some(Ω)` selects the bounded linear problem, `None` the
/// nonlinear problem on the whole plane (which also needs `horizon`).
pub fn select_params(
    m_target: f64,
    points_x: &[Point],
    d: &Region,
    omega: Option<&Region>,
    constants: &Constants,
    dim: u8,
    horizon: f64,
) -> Result<ConstructionParams> {
    if !(m_target > 0.0) || !m_target.is_finite() {
        return Err(Error::Validation(format!("amplification target must be positive, got {m_target}")));
    }
    if !(dim == 2 || dim == 3) {
        return Err(Error::Dimension(format!("dimension must be 2 or 3, got {dim}")));
    }
    if points_x.is_empty() {
        return Err(Error::Validation("at least one boundary point is required".into()));
    }
    constants.validate()?;
    d.validate()?;
    let mut min_sep = f64::INFINITY;
    for (i, a) in points_x.iter().enumerate() {
        for b in &points_x[i + 1..] {
            min_sep = min_sep.min(dist(*a, *b));
        }
    }
    if min_sep == 0.0 {
        return Err(Error::Validation("boundary points must be distinct".into()));
    }
    let c = constants;
    let mut r0_terms = vec![1.0 / (3.0 * (m_target + 1.0)), min_sep / 6.0];
    let (problem, eps_terms) = match omega {
        Some(om) => {
            om.validate()?;
            r0_terms.push(dist_to_boundary(d, om)? / 3.0);
            (Problem::Linear, vec![1.0 / (c.c1 + c.c2 + c.c3), 1.0])
        }
        None => {
            if !(horizon > 0.0) || !horizon.is_finite() {
                return Err(Error::Validation(format!("horizon T must be positive, got {horizon}")));
            }
            let terms =
                vec![1.0 / (c.c1 + c.c6 * c.c6), 1.0 / (c.c4 * horizon).powi(2), 1.0 / (4.0 * c.c5 * horizon), 1.0];
            (Problem::Nonlinear, terms)
        }
    };
    let r0 = r0_terms.iter().cloned().fold(f64::INFINITY, f64::min);
    let eps = eps_terms.iter().cloned().fold(f64::INFINITY, f64::min);
    let m = mode_order(dim, problem, r0, eps, m_target, c)?;
    Ok(ConstructionParams { problem, dim, m_target, r0, eps, m, constants: *constants, r0_terms, eps_terms })
}

/// What one pilot run measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotMeasurement {
    /// Residual of the fit on D (the smallness side).
    pub eps_domain: f64,
    /// Largest residual over the ball sets (the peak side).
    pub eps_ball: f64,
    /// sup over stored times of ‖u₀‖_{C^{1,½}(D̄)}.
    pub u0_c1half_dbar: f64,
    /// Closed-form mode peak minus the peak of |u₀| on the ball boundary.
    pub peak_deficit: f64,
    /// sup_t ‖𝒰‖_{C^{1,½}(D̄)} of the linear auxiliary solution.
    pub aux_linear: Option<f64>,
    /// Same for the nonlinear auxiliary solution.
    pub aux_nonlinear: Option<f64>,
    pub horizon: f64,
}

/// Largest measured ratio per constant; 1.0 where no pilot gives a usable ratio.
pub fn calibrate_constants(pilots: &[PilotMeasurement]) -> Constants {
    let pick = |f: &dyn Fn(&PilotMeasurement) -> Option<(f64, f64)>| {
        let best = pilots
            .iter()
            .filter_map(f)
            .filter(|(num, den)| *den > 0.0 && num.is_finite() && den.is_finite())
            .map(|(num, den)| num.max(0.0) / den)
            .fold(f64::NAN, f64::max);
        if best.is_finite() && best > 0.0 {
            best
        } else {
            1.0
        }
    };
    Constants {
        c1: pick(&|p| Some((p.u0_c1half_dbar, p.eps_domain))),
        c2: pick(&|p| Some((p.peak_deficit, p.eps_ball))),
        c3: pick(&|p| p.aux_linear.map(|a| (a, p.eps_domain))),
        c4: pick(&|p| p.aux_nonlinear.map(|a| (a, p.eps_domain.sqrt() * p.horizon))),
        c5: pick(&|p| p.aux_nonlinear.map(|a| (a, p.eps_domain * p.horizon))),
        c6: pick(&|p| p.aux_nonlinear.map(|a| (a, p.eps_domain.sqrt()))),
    }
}
