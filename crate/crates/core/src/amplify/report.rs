use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{Constants, Problem};
use super::{grad_sup, holder_c1half_norm, superlevel_measure, FieldSamples, DEFAULT_PAIR_BUDGET};
use crate::error::{Error, Result};
use crate::geometry::{dist, AmplificationSites, Point, Region, SetExpr};
use crate::herglotz::U0;
use crate::schrodinger::ComplexField;
use crate::Complex64;

/// Drift allowed for a homogeneous Hermitian run.
pub const CONSERVATION_TOL: f64 = 1e-10;
/// Relative L² gap allowed between the direct and the decomposed solution.
pub const DECOMPOSITION_TOL: f64 = 5e-3;
/// Ratios within this fraction of their threshold are marginal.
pub const MARGINAL_BAND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Marginal,
    Fail,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Pass above (1+band)·threshold, fail below (1−band)·threshold.
    fn banded(value: f64, threshold: f64) -> Self {
        if value > threshold * (1.0 + MARGINAL_BAND) {
            Verdict::Pass
        } else if value < threshold * (1.0 - MARGINAL_BAND) || value.is_nan() {
            Verdict::Fail
        } else {
            Verdict::Marginal
        }
    }

    fn all(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        vs.into_iter().fold(Verdict::Pass, |acc, v| match (acc, v) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Marginal, _) | (_, Verdict::Marginal) => Verdict::Marginal,
            _ => Verdict::Pass,
        })
    }
}

/// The mean-value chain at one site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvtRecord {
    /// max |u| on ∂B_{r₀}(yᵢ) and where.
    pub peak: f64,
    pub peak_point: Point,
    /// sup_{D̄} |u|.
    pub smallness: f64,
    /// (peak − smallness)/(3r₀), floored at 0.
    pub implied_bound: f64,
    /// Nearest point of D̄ to the peak point.
    pub segment_end: Point,
    pub segment_length: f64,
    /// max |∇u| sampled along the segment.
    pub measured: f64,
}

impl MvtRecord {
    pub fn holds(&self, slack: f64) -> bool {
        self.measured >= self.implied_bound * (1.0 - slack)
    }
}

fn nearest_point(d: &Region, p: Point) -> Point {
    let mut q = p;
    for _ in 0..4 {
        let sd = d.signed_distance(q);
        let h = 1e-7;
        let gx = (d.signed_distance([q[0] + h, q[1]]) - d.signed_distance([q[0] - h, q[1]])) / (2.0 * h);
        let gy = (d.signed_distance([q[0], q[1] + h]) - d.signed_distance([q[0], q[1] - h])) / (2.0 * h);
        let n = gx.hypot(gy).max(1e-300);
        q = [q[0] - sd * gx / n, q[1] - sd * gy / n];
    }
    q
}

/// Peak on the ball boundary, smallness on D̄, the implied lower bound and
/// the gradient actually measured along the segment from the peak to D̄.
///
/// `field` returns value and gradient; `dbar` are samples of D̄ on which
/// the smallness is measured.
pub fn mvt_chain_diagnostic(
    field: &dyn Fn(Point) -> (Complex64, [Complex64; 2]),
    center: Point,
    r0: f64,
    d: &Region,
    dbar: &FieldSamples,
) -> MvtRecord {
    const N_CIRCLE: usize = 1440;
    const N_SEGMENT: usize = 801;
    let mut peak = (-1.0, center);
    for k in 0..N_CIRCLE {
        let a = std::f64::consts::TAU * k as f64 / N_CIRCLE as f64;
        let p = [center[0] + r0 * a.cos(), center[1] + r0 * a.sin()];
        let v = field(p).0.norm();
        if v > peak.0 {
            peak = (v, p);
        }
    }
    let smallness = dbar.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let end = nearest_point(d, peak.1);
    let mut measured = 0.0f64;
    for k in 0..N_SEGMENT {
        let s = k as f64 / (N_SEGMENT - 1) as f64;
        let p = [peak.1[0] + s * (end[0] - peak.1[0]), peak.1[1] + s * (end[1] - peak.1[1])];
        let g = field(p).1;
        measured = measured.max((g[0].norm_sqr() + g[1].norm_sqr()).sqrt());
    }
    MvtRecord {
        peak: peak.0,
        peak_point: peak.1,
        smallness,
        implied_bound: ((peak.0 - smallness) / (3.0 * r0)).max(0.0),
        segment_end: end,
        segment_length: dist(peak.1, end),
        measured,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteStep {
    pub grad_sup: f64,
    pub grad_sup_point: Point,
    pub c1half_outside: f64,
    pub ratio: f64,
    pub mvt: MvtRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub t: f64,
    pub sites: Vec<SiteStep>,
    pub c1half_dbar: f64,
    /// Level used for the super-level area.
    pub level: f64,
    pub superlevel_area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub m_target: f64,
    /// Fixed super-level threshold; `None` uses half the smallest site grad_sup.
    pub level: Option<f64>,
    /// Pilot-derived floor for the C^{1,½} ratio.
    pub ratio_target: Option<f64>,
    pub pair_budget: usize,
    pub mvt_slack: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            m_target: 1.0,
            level: None,
            ratio_target: None,
            pair_budget: DEFAULT_PAIR_BUDGET,
            mvt_slack: 0.01,
        }
    }
}

/// Bilinear value and gradient of a grid field, gradients from the same
/// differences as the grid samples.
fn interpolate(field: &ComplexField, p: Point) -> (Complex64, [Complex64; 2]) {
    let fx = ((p[0] - field.x0) / field.dx).clamp(0.0, (field.nx - 1) as f64);
    let fy = ((p[1] - field.y0) / field.dy).clamp(0.0, (field.ny - 1) as f64);
    let i = (fx.floor() as usize).min(field.nx - 2);
    let j = (fy.floor() as usize).min(field.ny - 2);
    let (sx, sy) = (fx - i as f64, fy - j as f64);
    let w = [
        (i, j, (1.0 - sx) * (1.0 - sy)),
        (i + 1, j, sx * (1.0 - sy)),
        (i, j + 1, (1.0 - sx) * sy),
        (i + 1, j + 1, sx * sy),
    ];
    let mut v = Complex64::new(0.0, 0.0);
    let mut g = [Complex64::new(0.0, 0.0); 2];
    for (a, b, c) in w {
        v += field.get(a, b) * c;
        let gg = super::grid_gradient(field, a, b);
        g[0] += gg[0] * c;
        g[1] += gg[1] * c;
    }
    (v, g)
}

fn site_regions(sites: &AmplificationSites, d: &Region) -> Vec<SetExpr> {
    sites
        .points_x
        .iter()
        .map(|x| SetExpr::difference(Region::Disk { center: *x, radius: 3.0 * sites.r0 }, d.clone()))
        .collect()
}

/// All per-step measurements on u = field + u₀(·, field.t) (u₀ optional).
pub fn verify_snapshot(
    field: &ComplexField,
    u0: Option<&U0>,
    sites: &AmplificationSites,
    d: &Region,
    opts: &VerifyOptions,
) -> Result<StepReport> {
    let t = field.t;
    let analytic = |p: Point| match u0 {
        Some(u) => {
            let j = u.jet2(p, t);
            (j.v, [j.dx, j.dy])
        }
        None => (Complex64::new(0.0, 0.0), [Complex64::new(0.0, 0.0); 2]),
    };
    let total = |p: Point| {
        let (a, ga) = analytic(p);
        let (b, gb) = interpolate(field, p);
        (a + b, [ga[0] + gb[0], ga[1] + gb[1]])
    };
    let dbar_expr: SetExpr = d.clone().into();
    let dbar = FieldSamples::from_grid_with(field, &dbar_expr, analytic)?;
    let c1half_dbar = holder_c1half_norm(&dbar, opts.pair_budget)?;
    let regions = site_regions(sites, d);
    let mut out_sites = Vec::with_capacity(regions.len());
    for (region, y) in regions.iter().zip(&sites.centers_y) {
        let s = FieldSamples::from_grid_with(field, region, analytic)?;
        let (g, gp) = grad_sup(&s)?;
        let c1 = holder_c1half_norm(&s, opts.pair_budget)?;
        let mvt = mvt_chain_diagnostic(&total, *y, sites.r0, d, &dbar);
        out_sites.push(SiteStep {
            grad_sup: g,
            grad_sup_point: gp,
            c1half_outside: c1,
            ratio: if c1half_dbar > 0.0 { c1 / c1half_dbar } else { f64::INFINITY },
            mvt,
        });
    }
    let level = opts.level.unwrap_or_else(|| 0.5 * out_sites.iter().map(|s| s.grad_sup).fold(f64::INFINITY, f64::min));
    let union = FieldSamples::from_grid_with(field, &SetExpr::Union(regions), analytic)?;
    Ok(StepReport { t, sites: out_sites, c1half_dbar, level, superlevel_area: superlevel_measure(&union, level) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationFlags {
    /// grad_sup ≥ 𝓜 at every site and step.
    pub gradient: Verdict,
    /// grad_sup ≥ mean-value bound minus slack at every site and step.
    pub mvt_chain: Verdict,
    /// C^{1,½} ratio > 𝓜/2, marginal within 10%.
    pub ratio: Verdict,
    pub ratio_target: Option<Verdict>,
    /// 0 < super-level area ≤ 9nπr₀².
    pub localization: Verdict,
    pub conservation: Option<Verdict>,
    pub decomposition: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub problem: Problem,
    pub m_target: f64,
    pub r0: f64,
    pub m: u32,
    pub n_sites: usize,
    /// Achieved fit residual per collocation set.
    pub eps_hat: Vec<(String, f64)>,
    pub constants: Constants,
    pub area_bound: f64,
    pub steps: Vec<StepReport>,
    pub conservation_drift: Option<f64>,
    pub decomposition_discrepancy: Option<f64>,
    pub ratio_target: Option<f64>,
    pub mvt_slack: f64,
    pub flags: VerificationFlags,
}

/// Everything a report needs besides the per-step measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportHeader {
    pub problem: Problem,
    pub m: u32,
    pub eps_hat: Vec<(String, f64)>,
    pub constants: Constants,
    pub conservation_drift: Option<f64>,
    pub decomposition_discrepancy: Option<f64>,
}

impl VerificationReport {
    /// Flags come from measured quantities and the displayed inequalities only.
    pub fn assemble(
        header: ReportHeader,
        sites: &AmplificationSites,
        opts: &VerifyOptions,
        steps: Vec<StepReport>,
    ) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Validation("no stored steps to verify".into()));
        }
        let r0 = sites.r0;
        let area_bound = 9.0 * sites.n() as f64 * std::f64::consts::PI * r0 * r0;
        let all_sites = || steps.iter().flat_map(|s| s.sites.iter());
        let min_ratio = all_sites().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
        let flags = VerificationFlags {
            gradient: Verdict::from_bool(all_sites().all(|s| s.grad_sup >= opts.m_target)),
            mvt_chain: Verdict::from_bool(
                all_sites().all(|s| s.grad_sup >= s.mvt.implied_bound * (1.0 - opts.mvt_slack)),
            ),
            ratio: Verdict::banded(min_ratio, 0.5 * opts.m_target),
            ratio_target: opts.ratio_target.map(|r| Verdict::from_bool(min_ratio >= r)),
            localization: Verdict::from_bool(
                steps.iter().all(|s| s.superlevel_area > 0.0 && s.superlevel_area <= area_bound),
            ),
            conservation: header.conservation_drift.map(|d| Verdict::from_bool(d <= CONSERVATION_TOL)),
            decomposition: header.decomposition_discrepancy.map(|d| Verdict::from_bool(d <= DECOMPOSITION_TOL)),
        };
        Ok(VerificationReport {
            problem: header.problem,
            m_target: opts.m_target,
            r0,
            m: header.m,
            n_sites: sites.n(),
            eps_hat: header.eps_hat,
            constants: header.constants,
            area_bound,
            steps,
            conservation_drift: header.conservation_drift,
            decomposition_discrepancy: header.decomposition_discrepancy,
            ratio_target: opts.ratio_target,
            mvt_slack: opts.mvt_slack,
            flags,
        })
    }

    pub fn overall(&self) -> Verdict {
        let f = &self.flags;
        Verdict::all(
            [f.gradient, f.mvt_chain, f.ratio, f.localization]
                .into_iter()
                .chain(f.ratio_target)
                .chain(f.conservation)
                .chain(f.decomposition),
        )
    }

    pub fn min_ratio(&self) -> f64 {
        self.steps.iter().flat_map(|s| &s.sites).map(|s| s.ratio).fold(f64::INFINITY, f64::min)
    }

    pub fn min_grad_sup(&self) -> f64 {
        self.steps.iter().flat_map(|s| &s.sites).map(|s| s.grad_sup).fold(f64::INFINITY, f64::min)
    }

    pub fn max_area(&self) -> f64 {
        self.steps.iter().map(|s| s.superlevel_area).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn summary(&self) -> String {
        let f = &self.flags;
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3e}"));
        let optv = |v: Option<Verdict>| v.map_or("n/a".to_string(), |x| format!("{x:?}"));
        let mut s = String::new();
        s += &format!(
            "problem {:?}, n = {}, r0 = {}, m = {}, M = {}\n",
            self.problem, self.n_sites, self.r0, self.m, self.m_target
        );
        for (name, e) in &self.eps_hat {
            s += &format!("eps_hat[{name}] = {e:.3e}\n");
        }
        let c = &self.constants;
        s += &format!(
            "constants C1..C6 = {:.3e} {:.3e} {:.3e} {:.3e} {:.3e} {:.3e}\n",
            c.c1, c.c2, c.c3, c.c4, c.c5, c.c6
        );
        s += &format!("stored steps {}\n", self.steps.len());
        s += &format!("min grad_sup {:.4e}   gradient {:?}\n", self.min_grad_sup(), f.gradient);
        s += &format!("mean-value chain (slack {}) {:?}\n", self.mvt_slack, f.mvt_chain);
        s += &format!(
            "min C^(1,1/2) ratio {:.4e}   ratio > M/2 {:?}   target {} {}\n",
            self.min_ratio(),
            f.ratio,
            opt(self.ratio_target),
            optv(f.ratio_target)
        );
        s += &format!(
            "max super-level area {:.4e} (bound {:.4e})   localization {:?}\n",
            self.max_area(),
            self.area_bound,
            f.localization
        );
        s += &format!("conservation drift {}   {}\n", opt(self.conservation_drift), optv(f.conservation));
        s +=
            &format!("decomposition discrepancy {}   {}\n", opt(self.decomposition_discrepancy), optv(f.decomposition));
        s += &format!("overall {:?}\n", self.overall());
        s
    }

    /// Writes `<stem>.json` and `<stem>.txt` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let j = dir.join(format!("{stem}.json"));
        std::fs::write(&j, self.to_json()?).map_err(|e| Error::io(&j, e))?;
        let t = dir.join(format!("{stem}.txt"));
        std::fs::write(&t, self.summary()).map_err(|e| Error::io(&t, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implied_bound_arithmetic() {
        let d = Region::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] };
        let dbar = FieldSamples::from_fn(&d.clone().into(), 0.1, |_| {
            (Complex64::new(0.5, 0.0), [Complex64::new(0.0, 0.0); 2])
        })
        .unwrap();
        // |u| = 0.5 + (x − 1) outside, constant gradient 1.
        let f = |p: Point| {
            (Complex64::new(0.5 + (p[0] - 1.0).max(0.0), 0.0), [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
        };
        let r = mvt_chain_diagnostic(&f, [1.6, 0.5], 0.3, &d, &dbar);
        assert!((r.peak - 1.4).abs() < 1e-12);
        assert!((r.implied_bound - 0.9 / 0.9).abs() < 1e-12);
        assert!((r.segment_length - 0.9).abs() < 1e-9);
        assert!(r.holds(0.01));
        let flat = |_: Point| (Complex64::new(0.5, 0.0), [Complex64::new(0.0, 0.0); 2]);
        assert_eq!(mvt_chain_diagnostic(&flat, [1.6, 0.5], 0.3, &d, &dbar).implied_bound, 0.0);
    }

    #[test]
    fn banded_verdicts() {
        assert_eq!(Verdict::banded(1.2, 1.0), Verdict::Pass);
        assert_eq!(Verdict::banded(1.05, 1.0), Verdict::Marginal);
        assert_eq!(Verdict::banded(0.95, 1.0), Verdict::Marginal);
        assert_eq!(Verdict::banded(0.5, 1.0), Verdict::Fail);
        assert_eq!(Verdict::all([Verdict::Pass, Verdict::Marginal]), Verdict::Marginal);
        assert_eq!(Verdict::all([Verdict::Marginal, Verdict::Fail]), Verdict::Fail);
    }
}
