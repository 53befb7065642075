//! Planar regions, signed distances, amplification-site placement and
//! cell quadrature over set expressions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Disk {
        center: Point,
        radius: f64,
    },
    Rectangle {
        min: Point,
        max: Point,
    },
    /// Convex polygon, vertices counterclockwise.
    Polygon {
        vertices: Vec<Point>,
    },
    /// {x : sd_base(x) ≤ delta}: the Minkowski sum with a disk of radius delta.
    Offset {
        base: Box<Region>,
        delta: f64,
    },
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * dx, a[1] + t * dy])
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Disk { radius, center } => {
                if !(*radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::Validation(format!("disk radius must be positive, got {radius}")));
                }
            }
            Region::Rectangle { min, max } => {
                if !(max[0] > min[0] && max[1] > min[1]) {
                    return Err(Error::Validation("rectangle max corner must exceed min corner".into()));
                }
            }
            Region::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(Error::Validation("polygon needs at least 3 vertices".into()));
                }
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                    if !(cross > 0.0) {
                        return Err(Error::Validation(
                            "polygon must be strictly convex with counterclockwise vertices".into(),
                        ));
                    }
                }
                // Convex and CCW at every vertex with total turning 2π means simple.
                let mut turn = 0.0;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    let e1 = (b[1] - a[1]).atan2(b[0] - a[0]);
                    let e2 = (c[1] - b[1]).atan2(c[0] - b[0]);
                    let mut d = e2 - e1;
                    while d <= -std::f64::consts::PI {
                        d += 2.0 * std::f64::consts::PI;
                    }
                    while d > std::f64::consts::PI {
                        d -= 2.0 * std::f64::consts::PI;
                    }
                    turn += d;
                }
                if (turn - 2.0 * std::f64::consts::PI).abs() > 1e-9 {
                    return Err(Error::Validation("polygon is self-intersecting".into()));
                }
            }
            Region::Offset { base, delta } => {
                if !(*delta > 0.0) {
                    return Err(Error::Validation("offset must be positive".into()));
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    /// Negative inside, positive outside, zero on the boundary.
    pub fn signed_distance(&self, p: Point) -> f64 {
        match self {
            Region::Disk { center, radius } => dist(p, *center) - radius,
            Region::Rectangle { min, max } => {
                let cx = 0.5 * (min[0] + max[0]);
                let cy = 0.5 * (min[1] + max[1]);
                let qx = (p[0] - cx).abs() - 0.5 * (max[0] - min[0]);
                let qy = (p[1] - cy).abs() - 0.5 * (max[1] - min[1]);
                qx.max(0.0).hypot(qy.max(0.0)) + qx.max(qy).min(0.0)
            }
            Region::Polygon { vertices } => {
                let n = vertices.len();
                let mut d = f64::INFINITY;
                let mut inside = true;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    d = d.min(segment_distance(p, a, b));
                    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                    if cross < 0.0 {
                        inside = false;
                    }
                }
                if inside {
                    -d
                } else {
                    d
                }
            }
            Region::Offset { base, delta } => base.signed_distance(p) - delta,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.signed_distance(p) <= 0.0
    }

    pub fn bbox(&self) -> (Point, Point) {
        match self {
            Region::Disk { center, radius } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
            Region::Rectangle { min, max } => (*min, *max),
            Region::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            Region::Offset { base, delta } => {
                let (lo, hi) = base.bbox();
                ([lo[0] - delta, lo[1] - delta], [hi[0] + delta, hi[1] + delta])
            }
        }
    }

    pub fn centroid(&self) -> Point {
        match self {
            Region::Disk { center, .. } => *center,
            Region::Rectangle { min, max } => [0.5 * (min[0] + max[0]), 0.5 * (min[1] + max[1])],
            Region::Polygon { vertices } => {
                let n = vertices.len();
                let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let p = vertices[i];
                    let q = vertices[(i + 1) % n];
                    let c = p[0] * q[1] - q[0] * p[1];
                    a += c;
                    cx += (p[0] + q[0]) * c;
                    cy += (p[1] + q[1]) * c;
                }
                [cx / (3.0 * a), cy / (3.0 * a)]
            }
            Region::Offset { base, .. } => base.centroid(),
        }
    }

    /// Outward unit normal at a boundary point; the bisector of adjacent
    /// edge normals at polygon vertices.
    pub fn outward_normal(&self, p: Point) -> Point {
        match self {
            Region::Disk { center, .. } => {
                let d = dist(p, *center);
                [(p[0] - center[0]) / d, (p[1] - center[1]) / d]
            }
            Region::Rectangle { min, max } => {
                let verts = vec![*min, [max[0], min[1]], *max, [min[0], max[1]]];
                polygon_normal(&verts, p)
            }
            Region::Polygon { vertices } => polygon_normal(vertices, p),
            Region::Offset { .. } => {
                let h = 1e-7;
                let gx = (self.signed_distance([p[0] + h, p[1]]) - self.signed_distance([p[0] - h, p[1]])) / (2.0 * h);
                let gy = (self.signed_distance([p[0], p[1] + h]) - self.signed_distance([p[0], p[1] - h])) / (2.0 * h);
                let n = gx.hypot(gy);
                [gx / n, gy / n]
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Region::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Region::Rectangle { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
            Region::Polygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| {
                        let p = vertices[i];
                        let q = vertices[(i + 1) % n];
                        p[0] * q[1] - q[0] * p[1]
                    })
                    .sum::<f64>()
            }
            Region::Offset { base, delta } => {
                let perim = base.perimeter();
                base.area() + perim * delta + std::f64::consts::PI * delta * delta
            }
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Region::Disk { radius, .. } => 2.0 * std::f64::consts::PI * radius,
            Region::Rectangle { min, max } => 2.0 * ((max[0] - min[0]) + (max[1] - min[1])),
            Region::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).map(|i| dist(vertices[i], vertices[(i + 1) % n])).sum()
            }
            Region::Offset { base, delta } => base.perimeter() + 2.0 * std::f64::consts::PI * delta,
        }
    }
}

fn polygon_normal(verts: &[Point], p: Point) -> Point {
    let n = verts.len();
    let mut acc = [0.0, 0.0];
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        let nrm = [dy / len, -dx / len];
        let d = segment_distance(p, a, b);
        if d <= 1e-9 {
            acc[0] += nrm[0];
            acc[1] += nrm[1];
        }
        if d < best.0 {
            best = (d, nrm);
        }
    }
    let len = acc[0].hypot(acc[1]);
    if len > 0.0 {
        [acc[0] / len, acc[1] / len]
    } else {
        best.1
    }
}

/// Boolean compositions of regions. Signed distances of composites are the
/// usual min/max bounds: exact in sign, a lower bound in magnitude.
#[derive(Debug, Clone, PartialEq)]
pub enum SetExpr {
    Region(Region),
    Union(Vec<SetExpr>),
    Intersection(Vec<SetExpr>),
    /// A ∖ B̄.
    Difference(Box<SetExpr>, Box<SetExpr>),
}

impl From<Region> for SetExpr {
    fn from(r: Region) -> Self {
        SetExpr::Region(r)
    }
}

impl SetExpr {
    pub fn difference(a: impl Into<SetExpr>, b: impl Into<SetExpr>) -> Self {
        SetExpr::Difference(Box::new(a.into()), Box::new(b.into()))
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        match self {
            SetExpr::Region(r) => r.signed_distance(p),
            SetExpr::Union(v) => v.iter().map(|e| e.signed_distance(p)).fold(f64::INFINITY, f64::min),
            SetExpr::Intersection(v) => v.iter().map(|e| e.signed_distance(p)).fold(f64::NEG_INFINITY, f64::max),
            SetExpr::Difference(a, b) => a.signed_distance(p).max(-b.signed_distance(p)),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            SetExpr::Region(r) => r.contains(p),
            SetExpr::Union(v) => v.iter().any(|e| e.contains(p)),
            SetExpr::Intersection(v) => v.iter().all(|e| e.contains(p)),
            SetExpr::Difference(a, b) => a.contains(p) && b.signed_distance(p) > 0.0,
        }
    }

    pub fn bbox(&self) -> (Point, Point) {
        match self {
            SetExpr::Region(r) => r.bbox(),
            SetExpr::Union(v) => {
                v.iter().map(|e| e.bbox()).fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), (a, b)| {
                    ([lo[0].min(a[0]), lo[1].min(a[1])], [hi[0].max(b[0]), hi[1].max(b[1])])
                })
            }
            SetExpr::Intersection(v) => {
                v.iter().map(|e| e.bbox()).fold(([f64::NEG_INFINITY; 2], [f64::INFINITY; 2]), |(lo, hi), (a, b)| {
                    ([lo[0].max(a[0]), lo[1].max(a[1])], [hi[0].min(b[0]), hi[1].min(b[1])])
                })
            }
            SetExpr::Difference(a, _) => a.bbox(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplificationSites {
    pub points_x: Vec<Point>,
    pub centers_y: Vec<Point>,
    pub r0: f64,
}

impl AmplificationSites {
    pub fn n(&self) -> usize {
        self.points_x.len()
    }

    /// Checks every placement invariant; `omega = None` means ℝ² (nonlinear case).
    pub fn check(&self, d: &Region, omega: Option<&Region>) -> Result<()> {
        let r0 = self.r0;
        for (i, (x, y)) in self.points_x.iter().zip(&self.centers_y).enumerate() {
            let sep = dist(*x, *y);
            if (sep - 2.0 * r0).abs() > 1e-12 * (1.0 + 2.0 * r0) {
                return Err(Error::PlacementInfeasible(format!("site {i}: |x - y| = {sep} != 2 r0")));
            }
            let sd = d.signed_distance(*y);
            if !(sd - r0 > 0.25 * r0) {
                return Err(Error::PlacementInfeasible(format!(
                    "site {i}: dist(boundary of D, ball) = {} is not above r0/4",
                    sd - r0
                )));
            }
            if let Some(om) = omega {
                if !(om.signed_distance(*y) < -r0) {
                    return Err(Error::PlacementInfeasible(format!("site {i}: ball leaves Omega")));
                }
            }
            for (j, z) in self.centers_y.iter().enumerate().skip(i + 1) {
                if !(dist(*y, *z) > 2.0 * r0) {
                    return Err(Error::PlacementInfeasible(format!("balls {i} and {j} intersect")));
                }
            }
        }
        Ok(())
    }
}

/// yᵢ = xᵢ + 2r₀ n̂ᵢ with n̂ᵢ the outward normal of ∂D at xᵢ.
pub fn place_centers(points_x: &[Point], r0: f64, d: &Region, omega: Option<&Region>) -> Result<AmplificationSites> {
    if points_x.is_empty() {
        return Err(Error::Validation("at least one boundary point is required".into()));
    }
    if !(r0 > 0.0) {
        return Err(Error::Validation(format!("r0 must be positive, got {r0}")));
    }
    for (i, x) in points_x.iter().enumerate() {
        let sd = d.signed_distance(*x);
        if sd.abs() > 1e-9 {
            return Err(Error::Domain(format!("point {i} = {x:?} is not on the boundary of D (sd = {sd:e})")));
        }
    }
    let centers_y = points_x
        .iter()
        .map(|x| {
            let n = d.outward_normal(*x);
            [x[0] + 2.0 * r0 * n[0], x[1] + 2.0 * r0 * n[1]]
        })
        .collect();
    let sites = AmplificationSites { points_x: points_x.to_vec(), centers_y, r0 };
    sites.check(d, omega)?;
    Ok(sites)
}

/// D_δ = {sd_D ≤ δ/2}: an exact larger disk for disks, a rounded offset otherwise.
pub fn smooth_outer_approx(d: &Region, delta: f64) -> Result<Region> {
    if !(delta > 0.0) {
        return Err(Error::Validation(format!("delta must be positive, got {delta}")));
    }
    Ok(match d {
        Region::Disk { center, radius } => Region::Disk { center: *center, radius: radius + 0.5 * delta },
        other => Region::Offset { base: Box::new(other.clone()), delta: 0.5 * delta },
    })
}

/// Cell rule for the interior of a quadrature grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellRule {
    Midpoint,
    /// 2×2 Gauss–Legendre points per interior cell.
    Gauss2,
}

const CUT_LEVELS: u32 = 3;

fn cut_cell(expr: &SetExpr, c: Point, s: f64, level: u32, out: &mut Vec<(Point, f64)>) {
    let sd = expr.signed_distance(c);
    let half_diag = s * std::f64::consts::FRAC_1_SQRT_2;
    if sd <= -half_diag {
        out.push((c, s * s));
        return;
    }
    if sd >= half_diag {
        return;
    }
    if level == 0 {
        // Straight-interface area fraction from the distance gradient.
        let h = 1e-3 * s;
        let gx = (expr.signed_distance([c[0] + h, c[1]]) - expr.signed_distance([c[0] - h, c[1]])) / (2.0 * h);
        let gy = (expr.signed_distance([c[0], c[1] + h]) - expr.signed_distance([c[0], c[1] - h])) / (2.0 * h);
        let frac = (0.5 - sd / (s * (gx.abs() + gy.abs()).max(1e-12))).clamp(0.0, 1.0);
        if frac > 0.0 {
            out.push((c, frac * s * s));
        }
        return;
    }
    let q = 0.25 * s;
    for (ox, oy) in [(-q, -q), (q, -q), (-q, q), (q, q)] {
        cut_cell(expr, [c[0] + ox, c[1] + oy], 0.5 * s, level - 1, out);
    }
}

/// Cell quadrature over a set expression on a grid of spacing h.
///
/// Cells fully inside use `rule`; cells cut by the boundary are refined
/// three levels and finished with a straight-interface area fraction.
pub fn region_quadrature_with(expr: &SetExpr, h: f64, rule: CellRule) -> Result<Vec<(Point, f64)>> {
    if !(h > 0.0) {
        return Err(Error::Validation(format!("quadrature spacing must be positive, got {h}")));
    }
    let (lo, hi) = expr.bbox();
    if !(hi[0] > lo[0] && hi[1] > lo[1]) {
        return Err(Error::EmptyRegion("bounding box is empty".into()));
    }
    let nx = ((hi[0] - lo[0]) / h).ceil() as usize + 1;
    let ny = ((hi[1] - lo[1]) / h).ceil() as usize + 1;
    let x0 = 0.5 * (lo[0] + hi[0]) - 0.5 * nx as f64 * h;
    let y0 = 0.5 * (lo[1] + hi[1]) - 0.5 * ny as f64 * h;
    let g = 0.5 / 3f64.sqrt();
    let half_diag = h * std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let c = [x0 + (i as f64 + 0.5) * h, y0 + (j as f64 + 0.5) * h];
            let sd = expr.signed_distance(c);
            if sd <= -half_diag {
                match rule {
                    CellRule::Midpoint => out.push((c, h * h)),
                    CellRule::Gauss2 => {
                        for (ox, oy) in [(-g, -g), (g, -g), (-g, g), (g, g)] {
                            out.push(([c[0] + ox * h, c[1] + oy * h], 0.25 * h * h));
                        }
                    }
                }
            } else if sd < half_diag {
                cut_cell(expr, c, h, CUT_LEVELS, &mut out);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyRegion(format!("no cells of size {h} fall inside the region")));
    }
    Ok(out)
}

/// Midpoint cell quadrature with boundary refinement.
pub fn region_quadrature(expr: &SetExpr, h: f64) -> Result<Vec<(Point, f64)>> {
    region_quadrature_with(expr, h, CellRule::Midpoint)
}
