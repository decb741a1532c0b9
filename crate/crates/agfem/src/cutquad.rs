//! Numerical quadrature on cut regions and embedded boundary segments:
//! reference Gauss rules, subtriangulation rules, exact monomial moments on
//! clipped polygons (homogeneous-function edge recursion), and moment-fitted
//! rules at tensor Gauss nodes.

use crate::bases::{gauss_legendre_01, legendre, legendre_coeffs};
use crate::geometry::{subtriangulate, triangle_area, CutCellGeometry, CutStatus, Point, Segment, Vector};

/// Point/weight list in physical coordinates with the polynomial exactness
/// the construction guarantees.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// For subtriangulation rules: exact total degree. For moment-fitted
    /// rules: exact tensor degree per axis.
    pub degree: usize,
    pub positive: bool,
}

impl QuadratureRule {
    pub fn empty(degree: usize) -> Self {
        QuadratureRule { points: Vec::new(), weights: Vec::new(), degree, positive: true }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sum_weights(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: FnMut(Point) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

/// n-point Gauss-Legendre rule on [0, 1]; exact to degree 2n - 1.
pub fn gauss_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre_01(n)
}

/// Quadrature on a triangle, exact for total degree ≤ q, built by collapsing
/// a tensor Gauss rule onto the simplex. All weights positive.
pub fn simplex_rule(tri: &[Point; 3], q: usize) -> QuadratureRule {
    let area = triangle_area(tri);
    assert!(area > 0.0, "degenerate triangle rejected");
    let n = (q + 2).div_ceil(2);
    let (xs, ws) = gauss_legendre_01(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    let (a, b, c) = (tri[0], tri[1], tri[2]);
    for (&u, &wu) in xs.iter().zip(&ws) {
        for (&v, &wv) in xs.iter().zip(&ws) {
            // collapsed map of the unit square onto the reference simplex
            let r = u;
            let s = v * (1.0 - u);
            let p = Point::new(
                a.x + r * (b.x - a.x) + s * (c.x - a.x),
                a.y + r * (b.y - a.y) + s * (c.y - a.y),
            );
            points.push(p);
            weights.push(wu * wv * (1.0 - u) * 2.0 * area);
        }
    }
    QuadratureRule { points, weights, degree: q, positive: true }
}

/// Union of simplex rules over the subtriangulation of the cut region;
/// exact for total degree ≤ q with positive weights.
pub fn subtri_quadrature(geom: &CutCellGeometry, q: usize) -> QuadratureRule {
    if geom.status == CutStatus::Empty {
        return QuadratureRule::empty(q);
    }
    let mut rule = QuadratureRule::empty(q);
    for poly in &geom.polygons {
        for tri in subtriangulate(poly) {
            let r = simplex_rule(&tri, q);
            rule.points.extend(r.points);
            rule.weights.extend(r.weights);
        }
    }
    rule
}

/// Exact monomial moments of a clipped region in the reference frame of its
/// cell (so moments are well scaled), together with the cell Jacobian. A
/// second copy on the symmetric frame [-1, 1]² backs the Legendre transform,
/// where the small standard-Legendre coefficients keep cancellation in check.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub lo: Point,
    pub h: [f64; 2],
    /// Max monomial degree per axis.
    pub degree: usize,
    /// Row-major (degree+1)²: mono[a * (degree+1) + b] = ∫ x^a y^b dx dy over
    /// the region mapped to the [0, 1]² frame of the cell.
    pub mono: Vec<f64>,
    /// Same moments on the [-1, 1]² frame.
    mono_c: Vec<f64>,
}

impl MomentTable {
    /// Cell-frame ([0,1]²) moment ∫ x^a y^b.
    pub fn moment(&self, a: usize, b: usize) -> f64 {
        self.mono[a * (self.degree + 1) + b]
    }

    /// Region area in physical coordinates.
    pub fn area(&self) -> f64 {
        self.moment(0, 0) * self.h[0] * self.h[1]
    }
}

/// Moments of all monomials x^a y^b with a, b ≤ degree over the cut region,
/// computed by the homogeneous-function recursion that reduces polygon
/// integrals to edge integrals and edge integrals to vertex evaluations.
pub fn monomial_moments(geom: &CutCellGeometry, degree: usize) -> MomentTable {
    let h = [geom.hi.x - geom.lo.x, geom.hi.y - geom.lo.y];
    let nd = degree + 1;
    let mut mono = vec![0.0; nd * nd];
    let mut mono_c = vec![0.0; nd * nd];
    for poly in &geom.polygons {
        let ref_poly: Vec<Point> = poly
            .iter()
            .map(|p| Point::new((p.x - geom.lo.x) / h[0], (p.y - geom.lo.y) / h[1]))
            .collect();
        accumulate_polygon_moments(&ref_poly, degree, &mut mono);
        let cen_poly: Vec<Point> =
            ref_poly.iter().map(|p| Point::new(2.0 * p.x - 1.0, 2.0 * p.y - 1.0)).collect();
        accumulate_polygon_moments(&cen_poly, degree, &mut mono_c);
    }
    MomentTable { lo: geom.lo, h, degree, mono, mono_c }
}

fn accumulate_polygon_moments(poly: &[Point], degree: usize, mono: &mut [f64]) {
    let n = poly.len();
    let nd = degree + 1;
    for i in 0..n {
        let v1 = poly[i];
        let v2 = poly[(i + 1) % n];
        let e = v2 - v1;
        let len = e.norm();
        if len < 1e-300 {
            continue;
        }
        let u = e / len;
        let nrm = Vector::new(u.y, -u.x); // outward for CCW
        let plane_dist = nrm.dot(&v1.coords);
        // projection of the origin onto the edge line
        let s1 = v1.coords.dot(&u);
        let s2 = v2.coords.dot(&u);
        let x0 = v1.coords - u * s1;
        // edge integrals of x^a y^b by homogeneity, ascending in total degree
        let mut edge = vec![0.0; nd * nd];
        edge[0] = len;
        for q in 1..=2 * degree {
            for a in 0..=q.min(degree) {
                if q - a > degree {
                    continue;
                }
                let b = q - a;
                let fa = v2.x.powi(a as i32) * v2.y.powi(b as i32);
                let fb = v1.x.powi(a as i32) * v1.y.powi(b as i32);
                let mut val = s2 * fa - s1 * fb;
                if a > 0 {
                    val += x0.x * a as f64 * edge[(a - 1) * nd + b];
                }
                if b > 0 {
                    val += x0.y * b as f64 * edge[a * nd + (b - 1)];
                }
                edge[a * nd + b] = val / (q as f64 + 1.0);
            }
        }
        for a in 0..nd {
            for b in 0..nd {
                mono[a * nd + b] += plane_dist * edge[a * nd + b] / (a + b + 2) as f64;
            }
        }
    }
}

/// Monomial moments by subtriangulated quadrature; the independent route used
/// to cross-check the edge recursion.
pub fn monomial_moments_subtri(geom: &CutCellGeometry, degree: usize) -> MomentTable {
    let h = [geom.hi.x - geom.lo.x, geom.hi.y - geom.lo.y];
    let nd = degree + 1;
    let mut mono = vec![0.0; nd * nd];
    let mut mono_c = vec![0.0; nd * nd];
    let rule = subtri_quadrature(geom, 2 * degree);
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        let x = (p.x - geom.lo.x) / h[0];
        let y = (p.y - geom.lo.y) / h[1];
        let wref = w / (h[0] * h[1]);
        let mut xa = 1.0;
        for a in 0..nd {
            let mut yb = 1.0;
            for b in 0..nd {
                mono[a * nd + b] += wref * xa * yb;
                yb *= y;
            }
            xa *= x;
        }
        let (xc, yc) = (2.0 * x - 1.0, 2.0 * y - 1.0);
        let mut xa = 4.0 * wref;
        for a in 0..nd {
            let mut yb = 1.0;
            for b in 0..nd {
                mono_c[a * nd + b] += xa * yb;
                yb *= yc;
            }
            xa *= xc;
        }
    }
    MomentTable { lo: geom.lo, h, degree, mono, mono_c }
}

/// Moments of the (2m+1)² tensor Gauss-node Lagrange cardinal functions,
/// obtained through the monomial → Legendre → Lagrange transform chain (never
/// through a monomial Vandermonde inverse). Returned in physical measure.
pub fn legendre_lagrange_transform(moments: &MomentTable, m: usize) -> Vec<f64> {
    let n = 2 * m + 1;
    assert!(moments.degree >= 2 * m, "need monomial moments up to tensor degree 2m per axis");
    // Legendre moments Λ_kl = ∫ P_k(x) P_l(y) over the region on [-1, 1]²
    let coeffs: Vec<Vec<f64>> = (0..n).map(legendre_coeffs).collect();
    let mut leg = vec![0.0; n * n];
    // contract x first: tmp[k][b] = Σ_a c_k[a] M[a][b]
    let nd = moments.degree + 1;
    let mut tmp = vec![0.0; n * nd];
    for k in 0..n {
        for (a, &c) in coeffs[k].iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for b in 0..nd {
                tmp[k * nd + b] += c * moments.mono_c[a * nd + b];
            }
        }
    }
    for k in 0..n {
        for l in 0..n {
            let mut s = 0.0;
            for (b, &c) in coeffs[l].iter().enumerate() {
                s += c * tmp[k * nd + b];
            }
            leg[k * n + l] = s;
        }
    }
    // Lagrange cardinal expansion at the Gauss nodes of [-1, 1]:
    // ℓ_i = Σ_k ((2k+1)/2) w_i P_k(x_i) P_k
    let (xs01, ws01) = gauss_legendre_01(n);
    let xs: Vec<f64> = xs01.iter().map(|&x| 2.0 * x - 1.0).collect();
    let ws: Vec<f64> = ws01.iter().map(|&w| 2.0 * w).collect();
    let mut ptab = vec![0.0; n * n]; // ptab[i][k] = P_k(x_i)
    for i in 0..n {
        for k in 0..n {
            ptab[i * n + k] = legendre(k, xs[i]).0;
        }
    }
    // physical Jacobian of the map [-1,1]² -> cell
    let jac = 0.25 * moments.h[0] * moments.h[1];
    let mut lagr = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                let ak = 0.5 * (2 * k + 1) as f64 * ptab[i * n + k];
                let mut inner = 0.0;
                for l in 0..n {
                    inner += 0.5 * (2 * l + 1) as f64 * ptab[j * n + l] * leg[k * n + l];
                }
                s += ak * inner;
            }
            lagr[i * n + j] = ws[i] * ws[j] * s * jac;
        }
    }
    lagr
}

/// Moment-fitted volume rule: exactly (2m+1)² points at the tensor Gauss
/// nodes of the cell, with weights equal to the Lagrange moments of the cut
/// region. Exact for the full tensor space of degree 2m per axis; weights are
/// not guaranteed positive.
pub fn moment_fit(geom: &CutCellGeometry, m: usize) -> QuadratureRule {
    let n = 2 * m + 1;
    if geom.status == CutStatus::Empty {
        return QuadratureRule::empty(2 * m);
    }
    let moments = monomial_moments(geom, 2 * m);
    let weights = legendre_lagrange_transform(&moments, m);
    let (xs, _) = gauss_legendre_01(n);
    let h = [geom.hi.x - geom.lo.x, geom.hi.y - geom.lo.y];
    let mut points = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            points.push(Point::new(geom.lo.x + xs[i] * h[0], geom.lo.y + xs[j] * h[1]));
        }
    }
    let positive = weights.iter().all(|&w| w >= 0.0);
    QuadratureRule { points, weights, degree: 2 * m, positive }
}

/// Mapped 1D Gauss rule on one boundary segment; exact for polynomials of
/// total degree ≤ degree restricted to the segment.
pub fn segment_rule(seg: &Segment, degree: usize) -> QuadratureRule {
    let n = (degree + 2).div_ceil(2);
    let (xs, ws) = gauss_legendre_01(n);
    let len = seg.length();
    let points = xs
        .iter()
        .map(|&t| Point::new(seg.a.x + t * (seg.b.x - seg.a.x), seg.a.y + t * (seg.b.y - seg.a.y)))
        .collect();
    let weights = ws.iter().map(|&w| w * len).collect();
    QuadratureRule { points, weights, degree, positive: true }
}

/// Union of mapped 1D Gauss rules over a segment set; Σw equals the total
/// segment length.
pub fn boundary_quadrature(segments: &[Segment], degree: usize) -> QuadratureRule {
    let mut rule = QuadratureRule::empty(degree);
    for seg in segments {
        let r = segment_rule(seg, degree);
        rule.points.extend(r.points);
        rule.weights.extend(r.weights);
    }
    rule
}
