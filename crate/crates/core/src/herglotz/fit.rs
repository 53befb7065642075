//! Weighted least-squares fit of Herglotz kernels to collocated values and
//! gradients, with Tikhonov regularization on the discrete L² norm of g.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::HerglotzKernel;
use crate::error::{Error, Result};
use crate::geometry::{region_quadrature, smooth_outer_approx, Region, SetExpr};
use crate::quadrature::sphere_nodes;
use crate::transmission::TransmissionMode;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Above this estimate of cond(BᴴB + λI) the orthogonal path is used.
const NORMAL_EQ_COND_LIMIT: f64 = 1e12;

/// Points with target values and gradients, sharing one weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationSet {
    pub name: String,
    pub dim: u8,
    /// `dim` coordinates per point.
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `dim` components per point.
    pub grads: Vec<Complex64>,
    pub weight: f64,
}

impl CollocationSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        let d = self.dim as usize;
        &self.points[k * d..(k + 1) * d]
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim as usize;
        let n = self.values.len();
        if self.points.len() != n * d || self.grads.len() != n * d {
            return Err(Error::Dimension(format!("set '{}' has inconsistent array lengths", self.name)));
        }
        if !(self.weight > 0.0) || !self.weight.is_finite() {
            return Err(Error::Validation(format!("set '{}' needs a positive weight", self.name)));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !self.values.iter().all(finite)
            || !self.grads.iter().all(finite)
            || !self.points.iter().all(|p| p.is_finite())
        {
            return Err(Error::Validation(format!("set '{}' has non-finite entries", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitTarget {
    pub sets: Vec<CollocationSet>,
}

impl FitTarget {
    pub fn new(sets: Vec<CollocationSet>) -> Self {
        FitTarget { sets }
    }

    pub fn n_points(&self) -> usize {
        self.sets.iter().map(|s| s.len()).sum()
    }

    fn validate(&self) -> Result<u8> {
        if self.n_points() == 0 {
            return Err(Error::EmptyTargets);
        }
        let dim = self.sets[0].dim;
        for s in &self.sets {
            if s.dim != dim {
                return Err(Error::Dimension("collocation sets mix dimensions".into()));
            }
            s.validate()?;
        }
        Ok(dim)
    }
}

/// Polar (2D) or spherical (3D) tensor grid on B_{r0}(y) with the mode as target.
/// Radii are r0·k/n_radial, k = 1..n_radial, so the boundary is included.
pub fn ball_collocation(
    mode: &TransmissionMode,
    n_radial: usize,
    n_angular: usize,
    weight: f64,
) -> Result<CollocationSet> {
    if n_radial == 0 || n_angular == 0 {
        return Err(Error::Validation("collocation counts must be positive".into()));
    }
    let dirs: Vec<Vec<f64>> = match mode.dim {
        2 => (0..n_angular)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_angular as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let nt = (n_angular / 2).max(2);
            sphere_nodes(nt, n_angular).0.into_iter().map(|p| p.to_vec()).collect()
        }
    };
    let mut set = CollocationSet {
        name: format!("ball({})", mode.center.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(",")),
        dim: mode.dim,
        points: Vec::new(),
        values: Vec::new(),
        grads: Vec::new(),
        weight,
    };
    for k in 1..=n_radial {
        let r = mode.r0 * k as f64 / n_radial as f64;
        for u in &dirs {
            let x: Vec<f64> = mode.center.iter().zip(u).map(|(c, e)| c + r * e).collect();
            let (v, g) = mode.eval_v_grad(&x)?;
            set.points.extend_from_slice(&x);
            set.values.push(v);
            set.grads.extend(g);
        }
    }
    set.validate()?;
    Ok(set)
}

/// Zero targets at the region-quadrature nodes of D_{r0/4} with spacing h.
pub fn domain_collocation(d: &Region, r0: f64, h: f64, weight: f64) -> Result<CollocationSet> {
    let outer = smooth_outer_approx(d, 0.25 * r0)?;
    let nodes = region_quadrature(&SetExpr::from(outer), h)?;
    let zero = Complex64::new(0.0, 0.0);
    let set = CollocationSet {
        name: "domain".into(),
        dim: 2,
        points: nodes.iter().flat_map(|(p, _)| p.iter().copied()).collect(),
        values: vec![zero; nodes.len()],
        grads: vec![zero; 2 * nodes.len()],
        weight,
    };
    set.validate()?;
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// λ values tried; the L-curve corner is chosen when there are several.
    pub lambdas: Vec<f64>,
    /// Relative singular-value cutoff used when λ = 0.
    pub truncation: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { lambdas: (0..=8).map(|k| 10f64.powi(-14 + k)).collect(), truncation: 1e-15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolvePath {
    NormalEquations,
    Orthogonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetResidual {
    pub name: String,
    pub n_points: usize,
    pub weight: f64,
    /// RMS of |H_g − target| over the set.
    pub eps_value: f64,
    /// RMS of |∇H_g − ∇target| over the set.
    pub eps_grad: f64,
    /// sqrt(eps_value² + eps_grad²).
    pub eps: f64,
    /// RMS of the target values, for relative comparisons.
    pub target_rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LCurvePoint {
    pub lambda: f64,
    /// Weighted residual sum of squares, square-rooted.
    pub residual: f64,
    pub kernel_norm: f64,
    pub curvature: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub n_nodes: usize,
    pub lambda: f64,
    pub path: SolvePath,
    pub cond_estimate: f64,
    /// Weighted residual sum of squares.
    pub misfit: f64,
    /// λ‖g‖².
    pub penalty: f64,
    pub objective: f64,
    pub kernel_norm: f64,
    pub sets: Vec<SetResidual>,
    pub l_curve: Vec<LCurvePoint>,
}

impl FitReport {
    pub fn set(&self, name: &str) -> Option<&SetResidual> {
        self.sets.iter().find(|s| s.name == name)
    }
}

/// Design matrix in the variable h_j = √w_j g_j, so the penalty is λ|h|².
fn assemble(targets: &FitTarget, kernel: &HerglotzKernel) -> (DMatrix<Complex64>, DVector<Complex64>) {
    let d = kernel.dim as usize;
    let n = kernel.len();
    let rows = targets.n_points() * (d + 1);
    let mut b = DMatrix::<Complex64>::zeros(rows, n);
    let mut rhs = DVector::<Complex64>::zeros(rows);
    let sw: Vec<f64> = kernel.weights.iter().map(|w| w.sqrt()).collect();
    let mut r = 0;
    for set in &targets.sets {
        let sc = set.weight.sqrt();
        for k in 0..set.len() {
            let x = set.point(k);
            for j in 0..n {
                let th = kernel.node(j);
                let phase: f64 = th.iter().zip(x).map(|(a, b)| a * b).sum();
                let e = Complex64::from_polar(sc * sw[j], phase);
                b[(r, j)] = e;
                for c in 0..d {
                    b[(r + 1 + c, j)] = e * I * th[c];
                }
            }
            rhs[r] = set.values[k] * sc;
            for c in 0..d {
                rhs[r + 1 + c] = set.grads[k * d + c] * sc;
            }
            r += d + 1;
        }
    }
    (b, rhs)
}

/// Orthogonal route: Householder QR with column pivoting, then an SVD of R.
struct Orthogonal {
    /// Singular values of R.
    sigma: Vec<f64>,
    /// Uᴴ Qᴴ rhs.
    d: Vec<Complex64>,
    v: DMatrix<Complex64>,
    perm: nalgebra::PermutationSequence<nalgebra::Dyn>,
}

impl Orthogonal {
    fn new(b: &DMatrix<Complex64>, rhs: &DVector<Complex64>) -> Self {
        let (m, n) = b.shape();
        let k = m.min(n);
        let qr = b.clone().col_piv_qr();
        let mut qtb = rhs.clone();
        qr.q_tr_mul(&mut qtb);
        let r = qr.r();
        let perm = qr.p().clone();
        let svd = r.svd(true, true);
        let u = svd.u.expect("svd computed with u");
        let v = svd.v_t.expect("svd computed with v").adjoint();
        let c = qtb.rows(0, k).into_owned();
        let d = (u.adjoint() * c).iter().copied().collect();
        Orthogonal { sigma: svd.singular_values.iter().copied().collect(), d, v, perm }
    }

    fn sigma_max(&self) -> f64 {
        self.sigma.iter().copied().fold(0.0, f64::max)
    }

    /// Filter factors σ/(σ²+λ), or 1/σ above the cutoff when λ = 0.
    fn solve(&self, lambda: f64, truncation: f64) -> DVector<Complex64> {
        let cut = truncation * self.sigma_max();
        let z: Vec<Complex64> = self
            .sigma
            .iter()
            .zip(&self.d)
            .map(|(&s, &d)| {
                if lambda > 0.0 {
                    d * (s / (s * s + lambda))
                } else if s > cut {
                    d / s
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let mut x = &self.v * DVector::from_vec(z);
        let nrows = x.len();
        if !self.perm.is_empty() && nrows > 0 {
            self.perm.inv_permute_rows(&mut x);
        }
        x
    }

    fn cond(&self, lambda: f64) -> f64 {
        let smax = self.sigma_max();
        let smin = self.sigma.iter().copied().fold(f64::INFINITY, f64::min);
        (smax * smax + lambda) / (smin * smin + lambda)
    }
}

/// Normal route: Cholesky of BᴴB + λI after a spectral condition estimate.
struct Normal {
    gram: DMatrix<Complex64>,
    bh_rhs: DVector<Complex64>,
    eig_min: f64,
    eig_max: f64,
}

impl Normal {
    fn new(b: &DMatrix<Complex64>, rhs: &DVector<Complex64>) -> Self {
        let gram = b.ad_mul(b);
        let bh_rhs = b.ad_mul(rhs);
        let eig = gram.clone().symmetric_eigenvalues();
        let eig_min = eig.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
        let eig_max = eig.iter().copied().fold(0.0, f64::max);
        Normal { gram, bh_rhs, eig_min, eig_max }
    }

    fn cond(&self, lambda: f64) -> f64 {
        (self.eig_max + lambda) / (self.eig_min + lambda)
    }

    fn solve(&self, lambda: f64) -> Option<DVector<Complex64>> {
        let mut a = self.gram.clone();
        for k in 0..a.nrows() {
            a[(k, k)] += lambda;
        }
        a.cholesky().map(|c| c.solve(&self.bh_rhs))
    }
}

fn to_kernel(template: &HerglotzKernel, h: &DVector<Complex64>) -> HerglotzKernel {
    let mut k = template.clone();
    for (j, g) in k.coeffs.iter_mut().enumerate() {
        *g = h[j] / template.weights[j].sqrt();
    }
    k
}

/// Per-set residuals measured by evaluating the fitted kernel at every point.
/// Per-set residuals of an arbitrary kernel against the targets.
pub fn residuals(targets: &FitTarget, kernel: &HerglotzKernel) -> Result<Vec<SetResidual>> {
    if targets.validate()? != kernel.dim {
        return Err(Error::Dimension("kernel and targets differ in dimension".into()));
    }
    Ok(measure(targets, kernel)?.0)
}

fn measure(targets: &FitTarget, kernel: &HerglotzKernel) -> Result<(Vec<SetResidual>, f64)> {
    let d = kernel.dim as usize;
    let mut misfit = 0.0;
    let mut out = Vec::with_capacity(targets.sets.len());
    for set in &targets.sets {
        let (mut sv, mut sg, mut st) = (0.0, 0.0, 0.0);
        for k in 0..set.len() {
            let (v, g) = kernel.eval_h_grad(set.point(k))?;
            sv += (v - set.values[k]).norm_sqr();
            sg += (0..d).map(|c| (g[c] - set.grads[k * d + c]).norm_sqr()).sum::<f64>();
            st += set.values[k].norm_sqr();
        }
        misfit += set.weight * (sv + sg);
        let n = set.len().max(1) as f64;
        out.push(SetResidual {
            name: set.name.clone(),
            n_points: set.len(),
            weight: set.weight,
            eps_value: (sv / n).sqrt(),
            eps_grad: (sg / n).sqrt(),
            eps: ((sv + sg) / n).sqrt(),
            target_rms: (st / n).sqrt(),
        });
    }
    Ok((out, misfit))
}

/// Signed Menger curvature of consecutive log-log L-curve points; the corner
/// turns counter-clockwise as λ grows, so the maximum is taken.
fn menger(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let cross = (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0);
    let la = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    let lb = ((c.0 - b.0).powi(2) + (c.1 - b.1).powi(2)).sqrt();
    let lc = ((c.0 - a.0).powi(2) + (c.1 - a.1).powi(2)).sqrt();
    let den = la * lb * lc;
    if den > 0.0 {
        2.0 * cross / den
    } else {
        0.0
    }
}

/// Fit at a single λ. λ = 0 uses a truncated factorization.
pub fn fit_kernel(targets: &FitTarget, n_nodes: usize, lambda: f64) -> Result<(HerglotzKernel, FitReport)> {
    let opts = FitOptions { lambdas: vec![lambda], ..FitOptions::default() };
    fit_kernel_sweep(targets, n_nodes, &opts)
}

/// Fit over `opts.lambdas`, choosing the L-curve corner when more than two
/// values are supplied.
pub fn fit_kernel_sweep(targets: &FitTarget, n_nodes: usize, opts: &FitOptions) -> Result<(HerglotzKernel, FitReport)> {
    let dim = targets.validate()?;
    if n_nodes < 16 {
        return Err(Error::Validation(format!("n_nodes must be at least 16, got {n_nodes}")));
    }
    if opts.lambdas.is_empty() || opts.lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(Error::Validation("lambda values must be finite and non-negative".into()));
    }
    let template = HerglotzKernel::zeros(dim, n_nodes)?;
    let (b, rhs) = assemble(targets, &template);

    let normal = Normal::new(&b, &rhs);
    let mut orth: Option<Orthogonal> = None;
    let mut sols = Vec::with_capacity(opts.lambdas.len());
    for &lambda in &opts.lambdas {
        let cond = normal.cond(lambda);
        let direct = if lambda > 0.0 && cond < NORMAL_EQ_COND_LIMIT { normal.solve(lambda) } else { None };
        let (h, path, cond) = match direct {
            Some(h) => (h, SolvePath::NormalEquations, cond),
            None => {
                let o = orth.get_or_insert_with(|| Orthogonal::new(&b, &rhs));
                (o.solve(lambda, opts.truncation), SolvePath::Orthogonal, o.cond(lambda))
            }
        };
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::FitInfeasible(format!("non-finite coefficients at lambda = {lambda:e}")));
        }
        let res = &b * &h - &rhs;
        sols.push((lambda, h.clone(), path, cond, res.norm_squared(), h.norm_squared()));
    }

    let mut l_curve: Vec<LCurvePoint> = sols
        .iter()
        .map(|s| LCurvePoint { lambda: s.0, residual: s.4.sqrt(), kernel_norm: s.5.sqrt(), curvature: None })
        .collect();
    let mut pick = 0;
    if l_curve.len() >= 3 {
        let pts: Vec<(f64, f64)> =
            l_curve.iter().map(|p| (p.residual.max(1e-300).ln(), p.kernel_norm.max(1e-300).ln())).collect();
        let mut best = f64::NEG_INFINITY;
        for k in 1..pts.len() - 1 {
            let c = menger(pts[k - 1], pts[k], pts[k + 1]);
            l_curve[k].curvature = Some(c);
            if c > best {
                best = c;
                pick = k;
            }
        }
    } else if l_curve.len() == 2 {
        // Without a curve, prefer the smaller objective.
        let obj = |s: &(f64, DVector<Complex64>, SolvePath, f64, f64, f64)| s.4 + s.0 * s.5;
        pick = if obj(&sols[1]) < obj(&sols[0]) { 1 } else { 0 };
    }

    let (lambda, h, path, cond, _, norm2) = sols.swap_remove(pick);
    let kernel = to_kernel(&template, &h);
    let (sets, misfit) = measure(targets, &kernel)?;
    let penalty = lambda * norm2;
    let report = FitReport {
        n_nodes,
        lambda,
        path,
        cond_estimate: cond,
        misfit,
        penalty,
        objective: misfit + penalty,
        kernel_norm: kernel.l2_norm(),
        sets,
        l_curve,
    };
    Ok((kernel, report))
}

/// Regularized objective of an arbitrary kernel against `targets`.
pub fn objective(targets: &FitTarget, kernel: &HerglotzKernel, lambda: f64) -> Result<f64> {
    let (_, misfit) = measure(targets, kernel)?;
    Ok(misfit + lambda * kernel.l2_norm().powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_wave_set(dir: [f64; 2]) -> CollocationSet {
        let mut s =
            CollocationSet { name: "pw".into(), dim: 2, points: vec![], values: vec![], grads: vec![], weight: 1.0 };
        for k in 0..200 {
            let x = [(k % 20) as f64 * 0.05, (k / 20) as f64 * 0.1];
            let v = Complex64::from_polar(1.0, dir[0] * x[0] + dir[1] * x[1]);
            s.points.extend_from_slice(&x);
            s.values.push(v);
            s.grads.push(v * I * dir[0]);
            s.grads.push(v * I * dir[1]);
        }
        s
    }

    #[test]
    fn node_plane_wave_is_recovered() {
        // A plane wave along a node direction is exactly representable.
        let t = FitTarget::new(vec![plane_wave_set([1.0, 0.0])]);
        let (k, rep) = fit_kernel(&t, 16, 0.0).unwrap();
        assert!(rep.sets[0].eps < 1e-8, "{:?}", rep.sets[0]);
        let expect = 16.0 / (2.0 * std::f64::consts::PI);
        assert!((k.coeffs[0].re - expect).abs() < 1e-6 * expect);
    }

    #[test]
    fn empty_target_is_an_error() {
        assert!(matches!(fit_kernel(&FitTarget::default(), 32, 1e-8), Err(Error::EmptyTargets)));
    }

    #[test]
    fn both_paths_agree_on_a_well_conditioned_problem() {
        let t = FitTarget::new(vec![plane_wave_set([0.6, 0.8])]);
        let template = HerglotzKernel::zeros(2, 16).unwrap();
        let (b, rhs) = assemble(&t, &template);
        let lambda = 1e-2;
        let n = Normal::new(&b, &rhs);
        assert!(n.cond(lambda) < NORMAL_EQ_COND_LIMIT);
        let x1 = n.solve(lambda).unwrap();
        let x2 = Orthogonal::new(&b, &rhs).solve(lambda, 1e-15);
        assert!((&x1 - &x2).norm() < 1e-9 * x1.norm());
    }

    #[test]
    fn menger_sign() {
        // Vertical then horizontal: a counter-clockwise corner.
        assert!(menger((0.0, 1.0), (0.0, 0.0), (1.0, 0.0)) > 0.0);
    }
}
