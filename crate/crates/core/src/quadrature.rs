//! Quadrature rules shared across modules.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Adaptive Gauss–Legendre integration of a smooth function on [a, b].
///
/// Intervals are bisected until the 24-point rule and the sum over both halves
/// agree to `rtol` relative to the running total.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rtol: f64) -> f64 {
    let (gx, gw) = gauss_legendre(24);
    let rule = |lo: f64, hi: f64| {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        gx.iter().zip(&gw).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    };
    let whole = rule(a, b);
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut total = 0.0;
    let scale = whole.abs();
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let l = rule(lo, mid);
        let r = rule(mid, hi);
        if (l + r - est).abs() <= rtol * scale.max((l + r).abs()) || depth >= 40 {
            total += l + r;
        } else {
            stack.push((lo, mid, l, depth + 1));
            stack.push((mid, hi, r, depth + 1));
        }
    }
    total
}

/// n equispaced trapezoid nodes on the unit circle with weights 2π/n.
pub fn circle_nodes(n: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let h = 2.0 * PI / n as f64;
    let nodes = (0..n).map(|j| {
        let t = j as f64 * h;
        [t.cos(), t.sin()]
    });
    (nodes.collect(), vec![h; n])
}

/// Product rule on S²: Gauss–Legendre in cos θ times trapezoid in φ.
pub fn sphere_nodes(n_theta: usize, n_phi: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    let (ct, wt) = gauss_legendre(n_theta);
    let hp = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (c, w) in ct.iter().zip(&wt) {
        let s = (1.0 - c * c).sqrt();
        for k in 0..n_phi {
            let p = k as f64 * hp;
            nodes.push([s * p.cos(), s * p.sin(), *c]);
            weights.push(w * hp);
        }
    }
    (nodes, weights)
}
