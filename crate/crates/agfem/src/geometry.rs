//! Implicit level-set geometry with CSG composition and first-order clipping
//! of axis-aligned cells into interior polygons and embedded boundary segments.
//!
//! Sign convention: φ < 0 strictly inside the physical domain, φ > 0 strictly
//! outside, φ = 0 on the boundary. A sample with φ = 0 is classified inside,
//! so no epsilon fudge is needed anywhere downstream.

use nalgebra::{Point2, Vector2};

pub type Point = Point2<f64>;
pub type Vector = Vector2<f64>;

/// Implicit geometry as an expression tree of signed scalar fields.
///
/// Union is a pointwise `min`, intersection a pointwise `max`, complement a
/// negation. Combined fields keep a valid sign pattern but are not exact
/// distances; only signs and linear edge roots are consumed by the clipping.
#[derive(Clone, Debug)]
pub enum LevelSet {
    /// |p - center| - radius
    Disk { center: Point, radius: f64 },
    /// normal · (p - point); `normal` points out of the domain
    HalfPlane { point: Point, normal: Vector },
    /// Signed distance to an axis-aligned box
    Rect { min: Point, max: Point },
    /// Exact signed distance to a convex polygon (counter-clockwise vertices)
    ConvexPolygon { vertices: Vec<Point> },
    /// Constant field (useful for body-fitted configurations)
    Constant(f64),
    Union(Box<LevelSet>, Box<LevelSet>),
    Intersection(Box<LevelSet>, Box<LevelSet>),
    Complement(Box<LevelSet>),
    /// eval(p) = inner.eval(p - shift)
    Translate { inner: Box<LevelSet>, shift: Vector },
}

impl LevelSet {
    pub fn disk(cx: f64, cy: f64, radius: f64) -> Self {
        LevelSet::Disk { center: Point::new(cx, cy), radius }
    }

    pub fn half_plane(px: f64, py: f64, nx: f64, ny: f64) -> Self {
        let n = Vector::new(nx, ny).normalize();
        LevelSet::HalfPlane { point: Point::new(px, py), normal: n }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        LevelSet::Rect { min: Point::new(x0, y0), max: Point::new(x1, y1) }
    }

    pub fn convex_polygon(vertices: Vec<Point>) -> Self {
        assert!(vertices.len() >= 3, "convex polygon needs at least 3 vertices");
        LevelSet::ConvexPolygon { vertices }
    }

    pub fn union(self, other: LevelSet) -> Self {
        LevelSet::Union(Box::new(self), Box::new(other))
    }

    pub fn intersection(self, other: LevelSet) -> Self {
        LevelSet::Intersection(Box::new(self), Box::new(other))
    }

    pub fn complement(self) -> Self {
        LevelSet::Complement(Box::new(self))
    }

    /// Set difference self \ other.
    pub fn difference(self, other: LevelSet) -> Self {
        self.intersection(other.complement())
    }

    pub fn translate(self, shift: Vector) -> Self {
        LevelSet::Translate { inner: Box::new(self), shift }
    }

    /// Composed signed value at `p`.
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            LevelSet::Disk { center, radius } => (p - center).norm() - radius,
            LevelSet::HalfPlane { point, normal } => normal.dot(&(p - point)),
            LevelSet::Rect { min, max } => {
                // signed distance to the box boundary
                let dx = (min.x - p.x).max(p.x - max.x);
                let dy = (min.y - p.y).max(p.y - max.y);
                if dx <= 0.0 && dy <= 0.0 {
                    dx.max(dy)
                } else {
                    let ox = dx.max(0.0);
                    let oy = dy.max(0.0);
                    (ox * ox + oy * oy).sqrt()
                }
            }
            LevelSet::ConvexPolygon { vertices } => convex_polygon_sdf(vertices, p),
            LevelSet::Constant(c) => *c,
            LevelSet::Union(a, b) => a.eval(p).min(b.eval(p)),
            LevelSet::Intersection(a, b) => a.eval(p).max(b.eval(p)),
            LevelSet::Complement(a) => -a.eval(p),
            LevelSet::Translate { inner, shift } => inner.eval(p - shift),
        }
    }

    /// True when φ(p) ≤ 0 (boundary points count as inside).
    pub fn inside(&self, p: Point) -> bool {
        self.eval(p) <= 0.0
    }
}

/// Exact signed distance to a convex CCW polygon.
fn convex_polygon_sdf(vertices: &[Point], p: Point) -> f64 {
    let n = vertices.len();
    let mut max_line = f64::NEG_INFINITY;
    let mut min_seg = f64::INFINITY;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let e = b - a;
        let len = e.norm();
        // outward normal of a CCW edge
        let nrm = Vector::new(e.y, -e.x) / len;
        max_line = max_line.max(nrm.dot(&(p - a)));
        // distance to the segment
        let t = ((p - a).dot(&e) / (len * len)).clamp(0.0, 1.0);
        let proj = a + e * t;
        min_seg = min_seg.min((p - proj).norm());
    }
    if max_line <= 0.0 {
        max_line
    } else {
        min_seg
    }
}

/// Shoelace signed area; positive for CCW polygons.
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

/// One straight piece of the linearly approximated boundary Γ ∩ T, with the
/// unit normal pointing out of the physical domain.
#[derive(Clone, Debug)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    pub normal: Vector,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn midpoint(&self) -> Point {
        nalgebra::center(&self.a, &self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutStatus {
    Full,
    Empty,
    Cut,
}

/// First-order clip of a background cell against a level set.
#[derive(Clone, Debug)]
pub struct CutCellGeometry {
    /// Cell bounds (lower-left and upper-right corners).
    pub lo: Point,
    pub hi: Point,
    /// Interior region T ∩ Ω as simple CCW polygons.
    pub polygons: Vec<Vec<Point>>,
    /// Embedded boundary pieces with outward unit normals.
    pub segments: Vec<Segment>,
    pub status: CutStatus,
}

impl CutCellGeometry {
    pub fn cell_area(&self) -> f64 {
        (self.hi.x - self.lo.x) * (self.hi.y - self.lo.y)
    }

    pub fn interior_area(&self) -> f64 {
        self.polygons.iter().map(|p| polygon_area(p)).sum()
    }

    pub fn full(lo: Point, hi: Point) -> Self {
        let polygons = vec![vec![
            lo,
            Point::new(hi.x, lo.y),
            hi,
            Point::new(lo.x, hi.y),
        ]];
        CutCellGeometry { lo, hi, polygons, segments: Vec::new(), status: CutStatus::Full }
    }

    pub fn empty(lo: Point, hi: Point) -> Self {
        CutCellGeometry { lo, hi, polygons: Vec::new(), segments: Vec::new(), status: CutStatus::Empty }
    }
}

/// Point on the cell perimeter emitted by the marching walk.
#[derive(Clone, Copy)]
struct WalkPoint {
    p: Point,
    /// Perimeter side (0 = bottom, 1 = right, 2 = top, 3 = left); corners
    /// belong to both adjacent sides, stored as the side they start.
    side: u8,
    corner: bool,
}

/// Clips an axis-aligned cell against the level set with linear (first-order)
/// edge interpolation. The ambiguous saddle configuration is resolved by the
/// sign at the cell center.
pub fn clip_cell(lo: Point, hi: Point, ls: &LevelSet) -> CutCellGeometry {
    let h = (hi.x - lo.x).max(hi.y - lo.y);
    assert!(h > 0.0 && (hi.x - lo.x) > 0.0 && (hi.y - lo.y) > 0.0, "cell must have positive area");
    let corners = [
        lo,
        Point::new(hi.x, lo.y),
        hi,
        Point::new(lo.x, hi.y),
    ];
    let vals = [
        ls.eval(corners[0]),
        ls.eval(corners[1]),
        ls.eval(corners[2]),
        ls.eval(corners[3]),
    ];
    let ins = [vals[0] <= 0.0, vals[1] <= 0.0, vals[2] <= 0.0, vals[3] <= 0.0];
    let n_in = ins.iter().filter(|b| **b).count();

    if n_in == 4 {
        return CutCellGeometry::full(lo, hi);
    }
    if n_in == 0 {
        return CutCellGeometry::empty(lo, hi);
    }

    let crossing = |i: usize, j: usize| -> Point {
        let t = vals[i] / (vals[i] - vals[j]);
        let t = t.clamp(0.0, 1.0);
        Point::new(
            corners[i].x + t * (corners[j].x - corners[i].x),
            corners[i].y + t * (corners[j].y - corners[i].y),
        )
    };

    let saddle = ins == [true, false, true, false] || ins == [false, true, false, true];
    let merge_tol = 1e-12 * h;

    let mut polys: Vec<Vec<WalkPoint>> = Vec::new();
    if !saddle {
        let mut walk: Vec<WalkPoint> = Vec::new();
        for i in 0..4 {
            let j = (i + 1) % 4;
            if ins[i] {
                walk.push(WalkPoint { p: corners[i], side: i as u8, corner: true });
            }
            if ins[i] != ins[j] {
                walk.push(WalkPoint { p: crossing(i, j), side: i as u8, corner: false });
            }
        }
        polys.push(walk);
    } else {
        let center = nalgebra::center(&lo, &hi);
        let center_in = ls.eval(center) <= 0.0;
        let (a, c) = if ins[0] { (0usize, 2usize) } else { (1usize, 3usize) };
        let b = (a + 1) % 4;
        let d = (a + 3) % 4;
        if center_in {
            // one connected band through the cell
            polys.push(vec![
                WalkPoint { p: corners[a], side: a as u8, corner: true },
                WalkPoint { p: crossing(a, b), side: a as u8, corner: false },
                WalkPoint { p: crossing(b, c), side: b as u8, corner: false },
                WalkPoint { p: corners[c], side: c as u8, corner: true },
                WalkPoint { p: crossing(c, d), side: c as u8, corner: false },
                WalkPoint { p: crossing(d, a), side: d as u8, corner: false },
            ]);
        } else {
            // two disjoint corner triangles
            polys.push(vec![
                WalkPoint { p: corners[a], side: a as u8, corner: true },
                WalkPoint { p: crossing(a, b), side: a as u8, corner: false },
                WalkPoint { p: crossing(d, a), side: d as u8, corner: false },
            ]);
            polys.push(vec![
                WalkPoint { p: crossing(b, c), side: b as u8, corner: false },
                WalkPoint { p: corners[c], side: c as u8, corner: true },
                WalkPoint { p: crossing(c, d), side: c as u8, corner: false },
            ]);
        }
    }

    let cell_area = (hi.x - lo.x) * (hi.y - lo.y);
    let mut polygons: Vec<Vec<Point>> = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();
    for walk in polys {
        // merge near-coincident consecutive points
        let mut pts: Vec<WalkPoint> = Vec::new();
        for wp in walk {
            if let Some(last) = pts.last() {
                if (last.p - wp.p).norm() <= merge_tol {
                    continue;
                }
            }
            pts.push(wp);
        }
        while pts.len() >= 2 && (pts[0].p - pts.last().unwrap().p).norm() <= merge_tol {
            pts.pop();
        }
        if pts.len() < 3 {
            continue;
        }
        let poly: Vec<Point> = pts.iter().map(|w| w.p).collect();
        if polygon_area(&poly) < 1e-14 * cell_area {
            continue;
        }
        // cut segments: polygon sides whose endpoints do not share a cell side
        let n = pts.len();
        for i in 0..n {
            let a = &pts[i];
            let b = &pts[(i + 1) % n];
            if on_common_cell_side(a, b) {
                continue;
            }
            let dir = b.p - a.p;
            let len = dir.norm();
            if len <= merge_tol {
                continue;
            }
            // interior on the left of the CCW traversal => outward is to the right
            let normal = Vector::new(dir.y, -dir.x) / len;
            segments.push(Segment { a: a.p, b: b.p, normal });
        }
        polygons.push(poly);
    }

    if polygons.is_empty() {
        return CutCellGeometry::empty(lo, hi);
    }
    let total: f64 = polygons.iter().map(|p| polygon_area(p)).sum();
    if segments.is_empty() && (total - cell_area).abs() <= 1e-12 * cell_area {
        return CutCellGeometry::full(lo, hi);
    }
    CutCellGeometry { lo, hi, polygons, segments, status: CutStatus::Cut }
}

/// Whether two walk points lie on one common cell side (such a polygon edge
/// runs along the cell boundary and is not part of Γ).
fn on_common_cell_side(a: &WalkPoint, b: &WalkPoint) -> bool {
    let sides = |w: &WalkPoint| -> [bool; 4] {
        let mut s = [false; 4];
        s[w.side as usize] = true;
        if w.corner {
            s[(w.side as usize + 3) % 4] = true;
        }
        s
    };
    let sa = sides(a);
    let sb = sides(b);
    (0..4).any(|k| sa[k] && sb[k])
}

/// Partitions a simple CCW polygon into positively oriented triangles by ear
/// clipping. Degenerate input (area below 1e-14 of its bounding-box scale)
/// yields an empty list.
pub fn subtriangulate(poly: &[Point]) -> Vec<[Point; 3]> {
    let n = poly.len();
    if n < 3 {
        return Vec::new();
    }
    let area = polygon_area(poly);
    let mut bb = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            bb = bb.max((poly[i] - poly[j]).norm_squared());
        }
    }
    if area <= 1e-14 * bb.max(f64::MIN_POSITIVE) {
        return Vec::new();
    }
    if n == 3 {
        return vec![[poly[0], poly[1], poly[2]]];
    }

    let cross = |o: Point, a: Point, b: Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let eps = 1e-14 * bb;
    let mut guard = 0usize;
    while idx.len() > 3 {
        let k = idx.len();
        let mut clipped = false;
        for i in 0..k {
            let ia = idx[(i + k - 1) % k];
            let ib = idx[i];
            let ic = idx[(i + 1) % k];
            let c = cross(poly[ia], poly[ib], poly[ic]);
            if c <= eps {
                continue; // reflex or degenerate corner
            }
            // ear test: no other vertex strictly inside
            let mut ear = true;
            for &j in &idx {
                if j == ia || j == ib || j == ic {
                    continue;
                }
                let p = poly[j];
                if cross(poly[ia], poly[ib], p) > eps
                    && cross(poly[ib], poly[ic], p) > eps
                    && cross(poly[ic], poly[ia], p) > eps
                {
                    ear = false;
                    break;
                }
            }
            if ear {
                tris.push([poly[ia], poly[ib], poly[ic]]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // collinear run; drop the flattest corner and continue
            let k = idx.len();
            let mut best = 0usize;
            let mut bestc = f64::INFINITY;
            for i in 0..k {
                let ia = idx[(i + k - 1) % k];
                let ib = idx[i];
                let ic = idx[(i + 1) % k];
                let c = cross(poly[ia], poly[ib], poly[ic]).abs();
                if c < bestc {
                    bestc = c;
                    best = i;
                }
            }
            idx.remove(best);
        }
        guard += 1;
        if guard > 4 * n {
            break;
        }
    }
    if idx.len() == 3 {
        let t = [poly[idx[0]], poly[idx[1]], poly[idx[2]]];
        if cross(t[0], t[1], t[2]) > eps {
            tris.push(t);
        }
    }
    tris
}

pub fn triangle_area(t: &[Point; 3]) -> f64 {
    0.5 * ((t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[2].x - t[0].x) * (t[1].y - t[0].y))
}
