//! Discrete L = Δ₉ + ∇·(K∇·) + c on interior nodes and the BiCGSTAB solver
//! for the Crank–Nicolson systems.
//!
//! Δ₉ = D_xx + D_yy + (dx²+dy²)/12·D_xx D_yy is the compact nine-point
//! Laplacian; for dx = dy its O(h²) error is isotropic, so every plane wave
//! of a Herglotz sum sees the same dispersion. The contrast K = A − I acts
//! through cell-centred gradients G: L_K = −GᵀKG, Hermitian when K is.

use num_complex::Complex64;

use super::coeffs::Mat2;
use super::Grid2D;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone)]
pub struct Operator {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Active cells (lower-left node i, j) with their contrast.
    cells: Vec<(usize, usize, Mat2)>,
    /// Node potential c at interior nodes.
    potential: Vec<(usize, Complex64)>,
}

impl Operator {
    pub fn laplacian(grid: &Grid2D) -> Self {
        Operator { nx: grid.nx, ny: grid.ny, dx: grid.dx, dy: grid.dy, cells: vec![], potential: vec![] }
    }

    /// Samples K at cell centres; cells where K vanishes are skipped.
    pub fn with_contrast(mut self, grid: &Grid2D, k: impl Fn([f64; 2]) -> Mat2) -> Self {
        self.cells.clear();
        for i in 0..grid.nx - 1 {
            for j in 0..grid.ny - 1 {
                let c = [grid.x(i) + 0.5 * grid.dx, grid.y(j) + 0.5 * grid.dy];
                let m = k(c);
                if m.iter().flatten().any(|z| *z != ZERO) {
                    self.cells.push((i, j, m));
                }
            }
        }
        self
    }

    /// Node potential given on a list of grid indices; boundary entries are ignored.
    pub fn with_potential(mut self, entries: Vec<(usize, Complex64)>) -> Self {
        let (nx, ny) = (self.nx, self.ny);
        self.potential = entries
            .into_iter()
            .filter(|&(k, c)| {
                let (i, j) = (k / ny, k % ny);
                c != ZERO && i > 0 && j > 0 && i + 1 < nx && j + 1 < ny
            })
            .collect();
        self
    }

    pub fn n_contrast_cells(&self) -> usize {
        self.cells.len()
    }

    fn stencil(&self) -> (f64, f64, f64, f64) {
        let cx = 1.0 / (self.dx * self.dx);
        let cy = 1.0 / (self.dy * self.dy);
        let cxy = (self.dx * self.dx + self.dy * self.dy) / 12.0 * cx * cy;
        (-2.0 * cx - 2.0 * cy + 4.0 * cxy, cx - 2.0 * cxy, cy - 2.0 * cxy, cxy)
    }

    /// out = L u on interior nodes, 0 on the boundary. `u` carries boundary values.
    pub fn apply(&self, u: &[Complex64], out: &mut [Complex64]) {
        let (nx, ny) = (self.nx, self.ny);
        let (cc, ce, cn, cd) = self.stencil();
        out.iter_mut().for_each(|z| *z = ZERO);
        for i in 1..nx - 1 {
            let (w, c, e) = ((i - 1) * ny, i * ny, (i + 1) * ny);
            for j in 1..ny - 1 {
                let s = u[c + j] * cc
                    + (u[w + j] + u[e + j]) * ce
                    + (u[c + j - 1] + u[c + j + 1]) * cn
                    + (u[w + j - 1] + u[w + j + 1] + u[e + j - 1] + u[e + j + 1]) * cd;
                out[c + j] = s;
            }
        }
        let (hx, hy) = (0.5 / self.dx, 0.5 / self.dy);
        for &(i, j, ref k) in &self.cells {
            let n00 = i * ny + j;
            let (n10, n01, n11) = (n00 + ny, n00 + 1, n00 + ny + 1);
            let gx = (u[n10] + u[n11] - u[n00] - u[n01]) * hx;
            let gy = (u[n01] + u[n11] - u[n00] - u[n10]) * hy;
            let qx = k[0][0] * gx + k[0][1] * gy;
            let qy = k[1][0] * gx + k[1][1] * gy;
            let (a, b) = (qx * hx, qy * hy);
            self.add_interior(out, i, j, a + b);
            self.add_interior(out, i + 1, j, b - a);
            self.add_interior(out, i, j + 1, a - b);
            self.add_interior(out, i + 1, j + 1, -a - b);
        }
        for &(k, c) in &self.potential {
            out[k] += c * u[k];
        }
    }

    fn add_interior(&self, out: &mut [Complex64], i: usize, j: usize, v: Complex64) {
        if i > 0 && j > 0 && i + 1 < self.nx && j + 1 < self.ny {
            out[i * self.ny + j] += v;
        }
    }

    /// Diagonal of L on interior nodes, 0 on the boundary.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let (nx, ny) = (self.nx, self.ny);
        let (cc, ..) = self.stencil();
        let mut d = vec![ZERO; nx * ny];
        for i in 1..nx - 1 {
            for j in 1..ny - 1 {
                d[i * ny + j] = Complex64::new(cc, 0.0);
            }
        }
        let (hx, hy) = (0.5 / self.dx, 0.5 / self.dy);
        for &(i, j, ref k) in &self.cells {
            for (di, dj, sx, sy) in [(0, 0, -1.0, -1.0), (1, 0, 1.0, -1.0), (0, 1, -1.0, 1.0), (1, 1, 1.0, 1.0)] {
                let g = [sx * hx, sy * hy];
                let q: Complex64 =
                    (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| k[a][b] * g[a] * g[b]).sum();
                self.add_interior(&mut d, i + di, j + dj, -q);
            }
        }
        for &(k, c) in &self.potential {
            d[k] += c;
        }
        d
    }

    /// Discrete quadratic form Σ_cells dx dy (Gū)ᵀ A (Gu) with A = I + K,
    /// using cell-centred gradients everywhere.
    pub fn energy(&self, u: &[Complex64]) -> f64 {
        let ny = self.ny;
        let (hx, hy) = (0.5 / self.dx, 0.5 / self.dy);
        let mut k_at = std::collections::HashMap::new();
        for &(i, j, k) in &self.cells {
            k_at.insert((i, j), k);
        }
        let mut e = 0.0;
        for i in 0..self.nx - 1 {
            for j in 0..ny - 1 {
                let n00 = i * ny + j;
                let (n10, n01, n11) = (n00 + ny, n00 + 1, n00 + ny + 1);
                let g = [(u[n10] + u[n11] - u[n00] - u[n01]) * hx, (u[n01] + u[n11] - u[n00] - u[n10]) * hy];
                let mut q = g[0].norm_sqr() + g[1].norm_sqr();
                if let Some(k) = k_at.get(&(i, j)) {
                    for a in 0..2 {
                        for b in 0..2 {
                            q += (g[a].conj() * k[a][b] * g[b]).re;
                        }
                    }
                }
                e += q;
            }
        }
        e * self.dx * self.dy
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Jacobi-preconditioned BiCGSTAB for A x = b, starting from `x`.
/// Stops when ‖b − Ax‖ ≤ tol·‖b‖; a zero right-hand side returns x = 0 exactly.
pub fn bicgstab(
    mut apply: impl FnMut(&[Complex64], &mut [Complex64]),
    diag_inv: &[Complex64],
    b: &[Complex64],
    x: &mut [Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = b.len();
    let bn = norm(b);
    if bn == 0.0 {
        x.iter_mut().for_each(|z| *z = ZERO);
        return Ok(SolveStats::default());
    }
    let mut tmp = vec![ZERO; n];
    apply(x, &mut tmp);
    let mut r: Vec<Complex64> = b.iter().zip(&tmp).map(|(b, a)| b - a).collect();
    let mut rn = norm(&r);
    if rn <= tol * bn {
        return Ok(SolveStats { iterations: 0, relative_residual: rn / bn });
    }
    let mut rhat = r.clone();
    let (mut rho, mut alpha, mut omega) =
        (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    let mut ph = vec![ZERO; n];
    let mut sh = vec![ZERO; n];
    let mut t = vec![ZERO; n];
    for it in 1..=max_iter {
        let rho_new = dot(&rhat, &r);
        if rho_new.norm() < 1e-300 {
            // Shadow residual orthogonal to r: restart from the current residual.
            rhat.copy_from_slice(&r);
            rho = Complex64::new(1.0, 0.0);
            alpha = rho;
            omega = rho;
            v.iter_mut().for_each(|z| *z = ZERO);
            p.iter_mut().for_each(|z| *z = ZERO);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
            ph[k] = diag_inv[k] * p[k];
        }
        apply(&ph, &mut v);
        let den = dot(&rhat, &v);
        if den.norm() == 0.0 {
            return Err(Error::SolverDivergence { t: f64::NAN, msg: "BiCGSTAB breakdown".into() });
        }
        alpha = rho / den;
        for k in 0..n {
            r[k] -= alpha * v[k];
        }
        rn = norm(&r);
        if rn <= tol * bn {
            for k in 0..n {
                x[k] += alpha * ph[k];
            }
            return Ok(SolveStats { iterations: it, relative_residual: rn / bn });
        }
        for k in 0..n {
            sh[k] = diag_inv[k] * r[k];
        }
        apply(&sh, &mut t);
        let tt = dot(&t, &t).re;
        omega = if tt > 0.0 { dot(&t, &r) / tt } else { ZERO };
        for k in 0..n {
            x[k] += alpha * ph[k] + omega * sh[k];
            r[k] -= omega * t[k];
        }
        rn = norm(&r);
        if rn <= tol * bn {
            return Ok(SolveStats { iterations: it, relative_residual: rn / bn });
        }
        if !rn.is_finite() || omega == ZERO {
            return Err(Error::SolverDivergence { t: f64::NAN, msg: format!("BiCGSTAB stagnated at iteration {it}") });
        }
    }
    Err(Error::SolverDivergence {
        t: f64::NAN,
        msg: format!("BiCGSTAB reached {max_iter} iterations with relative residual {:.3e}", rn / bn),
    })
}
