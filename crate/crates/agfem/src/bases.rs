//! Shape function machinery: Jacobi polynomials, 1D Lagrangian and modal C⁰
//! bases (with the affine stretch of the high-order factor), and their
//! tensor-product / trunk-space assembly into per-cell local bases with
//! k-face mode attribution.

use crate::geometry::{Point, Vector};

// ---------------------------------------------------------------------------
// Legendre and Jacobi polynomials
// ---------------------------------------------------------------------------

/// P_n(x) and P_n'(x) on [-1, 1].
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = if x.abs() < 1.0 - 1e-14 {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    } else {
        let s = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 + 1) };
        s * 0.5 * (n * (n + 1)) as f64
    };
    (p1, d)
}

/// Shifted Legendre polynomial on [0, 1]: P̃_n(t) = P_n(2t - 1).
pub fn shifted_legendre(n: usize, t: f64) -> f64 {
    legendre(n, 2.0 * t - 1.0).0
}

/// Monomial coefficients of the standard Legendre polynomial P_n on [-1, 1]
/// (ascending powers).
pub fn legendre_coeffs(n: usize) -> Vec<f64> {
    // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for k in 1..n {
        let kf = k as f64;
        let mut next = vec![0.0; k + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += (2.0 * kf + 1.0) * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= kf * c;
        }
        for c in next.iter_mut() {
            *c /= kf + 1.0;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Standard Jacobi polynomial P_n^{(a,b)}(x) on [-1, 1] by the three-term
/// recurrence.
pub fn jacobi_std(n: usize, a: f64, b: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 0.5 * (a - b + (a + b + 2.0) * x);
    for k in 2..=n {
        let kf = k as f64;
        let c1 = 2.0 * kf * (kf + a + b) * (2.0 * kf + a + b - 2.0);
        let c2 = (2.0 * kf + a + b - 1.0)
            * ((2.0 * kf + a + b) * (2.0 * kf + a + b - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * (2.0 * kf + a + b);
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Jacobi polynomial on [0, 1] in the convention
/// J_n^{a,b}(t) = 2^{-a-b} P_n^{(a,b)}(2t - 1).
pub fn jacobi_eval(n: usize, a: f64, b: f64, t: f64) -> f64 {
    assert!(a > -1.0 && b > -1.0);
    2.0f64.powf(-a - b) * jacobi_std(n, a, b, 2.0 * t - 1.0)
}

/// d/dt J_n^{a,b}(t), using d/dx P_n^{(a,b)} = ((n+a+b+1)/2) P_{n-1}^{(a+1,b+1)}.
pub fn jacobi_deriv(n: usize, a: f64, b: f64, t: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let x = 2.0 * t - 1.0;
    2.0f64.powf(-a - b) * (n as f64 + a + b + 1.0) * jacobi_std(n - 1, a + 1.0, b + 1.0, x)
}

// ---------------------------------------------------------------------------
// Quadrature / interpolation nodes
// ---------------------------------------------------------------------------

/// n-point Gauss-Legendre rule on [0, 1]; exact for polynomials of degree
/// 2n - 1.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for k in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[k] = -x;
        xs[n - 1 - k] = x;
        ws[k] = w;
        ws[n - 1 - k] = w;
    }
    // map [-1,1] -> [0,1]
    for x in xs.iter_mut() {
        *x = 0.5 * (*x + 1.0);
    }
    for w in ws.iter_mut() {
        *w *= 0.5;
    }
    (xs, ws)
}

/// npts Gauss-Lobatto points on [0, 1] (both endpoints included); these are
/// the 1D Fekete points minimising the Lebesgue constant.
pub fn gauss_lobatto_01(npts: usize) -> Vec<f64> {
    assert!(npts >= 2);
    let n = npts - 1; // interior points are roots of P_n'
    let mut xs = vec![0.0; npts];
    xs[0] = -1.0;
    xs[npts - 1] = 1.0;
    for k in 1..n {
        // initial guess: Chebyshev-Lobatto point
        let mut x = (std::f64::consts::PI * (n - k) as f64 / n as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            // second derivative from the Legendre ODE
            let ddp = (2.0 * x * dp - (n * (n + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[k] = x;
    }
    for x in xs.iter_mut() {
        *x = 0.5 * (*x + 1.0);
    }
    // symmetrise exactly
    for k in 0..npts / 2 {
        let s = 0.5 * (xs[k] + (1.0 - xs[npts - 1 - k]));
        xs[k] = s;
        xs[npts - 1 - k] = 1.0 - s;
    }
    xs
}

// ---------------------------------------------------------------------------
// 1D bases
// ---------------------------------------------------------------------------

/// Generalised modal C⁰ basis of order m on the reference interval [0, 1].
///
/// φ_0 = 1 - ξ and φ_m = ξ are the nodal modes; the bubbles
/// φ_l = c_l ξ(1-ξ) J_{l-1}^{1,1}(s(ξ)) carry the affine stretch
/// s : [a, b] → [0, 1]. The normalisation c_l = -4√(2l+1)/l makes the
/// bubble derivatives orthonormal on [0, 1] at identity stretch.
#[derive(Clone, Copy, Debug)]
pub struct Modal1D {
    pub m: usize,
    /// Stretch interval [a, b] ⊇ [0, 1] in reference coordinates.
    pub stretch: (f64, f64),
}

impl Modal1D {
    pub fn new(m: usize, stretch: (f64, f64)) -> Self {
        assert!(m >= 1);
        assert!(stretch.1 > stretch.0, "stretch interval must have positive length");
        Modal1D { m, stretch }
    }

    pub fn identity(m: usize) -> Self {
        Modal1D::new(m, (0.0, 1.0))
    }

    fn bubble_scale(l: usize) -> f64 {
        -4.0 * ((2 * l + 1) as f64).sqrt() / l as f64
    }

    /// φ_l(ξ) for 0 ≤ l ≤ m; bubbles are defined for any real ξ.
    pub fn eval(&self, l: usize, xi: f64) -> f64 {
        assert!(l <= self.m, "mode index out of range");
        if l == 0 {
            1.0 - xi
        } else if l == self.m {
            xi
        } else {
            let (a, b) = self.stretch;
            let s = (xi - a) / (b - a);
            Self::bubble_scale(l) * xi * (1.0 - xi) * jacobi_eval(l - 1, 1.0, 1.0, s)
        }
    }

    /// dφ_l/dξ.
    pub fn deriv(&self, l: usize, xi: f64) -> f64 {
        assert!(l <= self.m, "mode index out of range");
        if l == 0 {
            -1.0
        } else if l == self.m {
            1.0
        } else {
            let (a, b) = self.stretch;
            let s = (xi - a) / (b - a);
            let ds = 1.0 / (b - a);
            let j = jacobi_eval(l - 1, 1.0, 1.0, s);
            let dj = jacobi_deriv(l - 1, 1.0, 1.0, s) * ds;
            Self::bubble_scale(l) * ((1.0 - 2.0 * xi) * j + xi * (1.0 - xi) * dj)
        }
    }
}

/// 1D Lagrangian basis of order m at the Gauss-Lobatto nodes of [0, 1];
/// cardinal polynomials are defined for any real ξ (extrapolation allowed).
#[derive(Clone, Debug)]
pub struct Lagrange1D {
    pub nodes: Vec<f64>,
}

impl Lagrange1D {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        Lagrange1D { nodes: gauss_lobatto_01(m + 1) }
    }

    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn eval(&self, i: usize, xi: f64) -> f64 {
        let n = self.nodes.len();
        assert!(i < n);
        let mut v = 1.0;
        for j in 0..n {
            if j != i {
                v *= (xi - self.nodes[j]) / (self.nodes[i] - self.nodes[j]);
            }
        }
        v
    }

    pub fn deriv(&self, i: usize, xi: f64) -> f64 {
        let n = self.nodes.len();
        assert!(i < n);
        let mut d = 0.0;
        for k in 0..n {
            if k == i {
                continue;
            }
            let mut term = 1.0 / (self.nodes[i] - self.nodes[k]);
            for j in 0..n {
                if j != i && j != k {
                    term *= (xi - self.nodes[j]) / (self.nodes[i] - self.nodes[j]);
                }
            }
            d += term;
        }
        d
    }
}

pub fn lagrange_1d_eval(m: usize, i: usize, xi: f64) -> f64 {
    Lagrange1D::new(m).eval(i, xi)
}

// ---------------------------------------------------------------------------
// Multivariate mode sets
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Lagrangian,
    Modal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Tensor,
    Trunk,
}

/// Reference k-face owning a mode. Edge numbering: 0 bottom, 1 right, 2 top,
/// 3 left; vertex numbering counter-clockwise from the lower-left corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalKFace {
    Vertex(u8),
    Edge(u8),
    Interior,
}

/// One multivariate mode: the pair of 1D factor indices and its owning
/// reference k-face.
#[derive(Clone, Copy, Debug)]
pub struct Mode {
    pub factors: [usize; 2],
    pub kface: LocalKFace,
}

#[derive(Clone, Debug)]
pub struct ModeSet {
    pub family: Family,
    pub space: SpaceKind,
    pub m: usize,
    pub modes: Vec<Mode>,
}

fn kface_of(i: usize, j: usize, m: usize) -> LocalKFace {
    let xi_nodal = i == 0 || i == m;
    let yj_nodal = j == 0 || j == m;
    match (xi_nodal, yj_nodal) {
        (true, true) => {
            let v = match (i == m, j == m) {
                (false, false) => 0,
                (true, false) => 1,
                (true, true) => 2,
                (false, true) => 3,
            };
            LocalKFace::Vertex(v)
        }
        (false, true) => LocalKFace::Edge(if j == 0 { 0 } else { 2 }),
        (true, false) => LocalKFace::Edge(if i == m { 1 } else { 3 }),
        (false, false) => LocalKFace::Interior,
    }
}

/// Builds the 2D mode list with k-face attribution: vertex modes first, then
/// edge modes (bottom, right, top, left; ascending factor index), then
/// interior modes. The trunk space keeps the tensor modes of total polynomial
/// degree ≤ m plus the serendipity corner terms; its interior modes are the
/// bubble pairs with degree sum ≤ m, so there are none for m ≤ 3.
pub fn build_mode_set(family: Family, space: SpaceKind, m: usize) -> Result<ModeSet, String> {
    if m < 1 {
        return Err("order must be at least 1".into());
    }
    if family == Family::Lagrangian && space == SpaceKind::Trunk && m >= 2 {
        return Err(
            "trunk space is only provided for the modal family; Lagrangian bases are tensor-product"
                .into(),
        );
    }
    let mut modes = Vec::new();
    // vertices, counter-clockwise
    for &(i, j) in &[(0, 0), (m, 0), (m, m), (0, m)] {
        modes.push(Mode { factors: [i, j], kface: kface_of(i, j, m) });
    }
    // edges: bottom, right, top, left
    for i in 1..m {
        modes.push(Mode { factors: [i, 0], kface: LocalKFace::Edge(0) });
    }
    for j in 1..m {
        modes.push(Mode { factors: [m, j], kface: LocalKFace::Edge(1) });
    }
    for i in 1..m {
        modes.push(Mode { factors: [i, m], kface: LocalKFace::Edge(2) });
    }
    for j in 1..m {
        modes.push(Mode { factors: [0, j], kface: LocalKFace::Edge(3) });
    }
    // interior
    for i in 1..m {
        for j in 1..m {
            let keep = match space {
                SpaceKind::Tensor => true,
                // bubble factor index l has polynomial degree l + 1
                SpaceKind::Trunk => (i + 1) + (j + 1) <= m,
            };
            if keep {
                modes.push(Mode { factors: [i, j], kface: LocalKFace::Interior });
            }
        }
    }
    Ok(ModeSet { family, space, m, modes })
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        self.modes.iter().filter(|md| md.kface == LocalKFace::Interior).count()
    }

    /// Interior node/bubble slot count per edge.
    pub fn modes_per_edge(&self) -> usize {
        self.m - 1
    }
}

// ---------------------------------------------------------------------------
// Local (per-cell) basis
// ---------------------------------------------------------------------------

/// Shape functions of one cell in physical coordinates. Every mode is a
/// tensor product of 1D factors; modal bubble factors carry an optional
/// per-axis stretch interval (in reference coordinates of the cell) that maps
/// the Jacobi argument over the owning face's stretch box.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    pub family: Family,
    pub m: usize,
    pub lo: Point,
    pub h: [f64; 2],
    pub modes: Vec<Mode>,
    /// Per-mode per-axis stretch; None = identity.
    pub stretch: Vec<[Option<(f64, f64)>; 2]>,
    lagrange: Option<Lagrange1D>,
}

impl LocalBasis {
    pub fn new(
        mode_set: &ModeSet,
        lo: Point,
        h: [f64; 2],
        stretch: Vec<[Option<(f64, f64)>; 2]>,
    ) -> Self {
        assert_eq!(stretch.len(), mode_set.modes.len());
        let lagrange = match mode_set.family {
            Family::Lagrangian => Some(Lagrange1D::new(mode_set.m)),
            Family::Modal => None,
        };
        LocalBasis {
            family: mode_set.family,
            m: mode_set.m,
            lo,
            h,
            modes: mode_set.modes.clone(),
            stretch,
            lagrange,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    fn factor(&self, idx: usize, stretch: Option<(f64, f64)>, xi: f64) -> (f64, f64) {
        match self.family {
            Family::Lagrangian => {
                let lg = self.lagrange.as_ref().unwrap();
                (lg.eval(idx, xi), lg.deriv(idx, xi))
            }
            Family::Modal => {
                let basis = Modal1D::new(self.m, stretch.unwrap_or((0.0, 1.0)));
                (basis.eval(idx, xi), basis.deriv(idx, xi))
            }
        }
    }

    /// Value of mode k at the physical point p (polynomial; p may lie outside
    /// the cell, which is how root shape functions are extended).
    pub fn eval(&self, k: usize, p: Point) -> f64 {
        self.eval_grad(k, p).0
    }

    /// Value and physical gradient of mode k at p.
    pub fn eval_grad(&self, k: usize, p: Point) -> (f64, Vector) {
        let xi = (p.x - self.lo.x) / self.h[0];
        let eta = (p.y - self.lo.y) / self.h[1];
        let md = &self.modes[k];
        let (fx, dfx) = self.factor(md.factors[0], self.stretch[k][0], xi);
        let (fy, dfy) = self.factor(md.factors[1], self.stretch[k][1], eta);
        let v = fx * fy;
        let g = Vector::new(dfx * fy / self.h[0], fx * dfy / self.h[1]);
        (v, g)
    }

    pub fn eval_all(&self, p: Point, vals: &mut [f64], grads: &mut [Vector]) {
        for k in 0..self.n_modes() {
            let (v, g) = self.eval_grad(k, p);
            vals[k] = v;
            grads[k] = g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // --- symbolic Rodrigues oracle -----------------------------------------
    // Polynomials as ascending coefficient vectors; enough machinery to
    // differentiate the Rodrigues product n times and strip the singular
    // prefactors exactly.

    fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    fn poly_diff(a: &[f64]) -> Vec<f64> {
        if a.len() <= 1 {
            return vec![0.0];
        }
        (1..a.len()).map(|i| a[i] * i as f64).collect()
    }

    /// Divide by (t - c); remainder must vanish.
    fn poly_div_root(a: &[f64], c: f64) -> Vec<f64> {
        let n = a.len();
        let mut q = vec![0.0; n - 1];
        let mut rem = a[n - 1];
        for i in (0..n - 1).rev() {
            q[i] = rem;
            rem = a[i] + c * rem;
        }
        assert!(rem.abs() < 1e-9, "nonzero remainder {rem} dividing by root {c}");
        q
    }

    fn poly_eval(a: &[f64], t: f64) -> f64 {
        a.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// J_n^{a,b} as a polynomial straight from the Rodrigues formula
    /// (integer a, b).
    fn rodrigues_poly(n: usize, a: usize, b: usize) -> Vec<f64> {
        // (1-t)^{a+n} t^{b+n}
        let mut q = vec![1.0];
        for _ in 0..(a + n) {
            q = poly_mul(&q, &[1.0, -1.0]);
        }
        for _ in 0..(b + n) {
            q = poly_mul(&q, &[0.0, 1.0]);
        }
        for _ in 0..n {
            q = poly_diff(&q);
        }
        // strip t^b and (1-t)^a = (-1)^a (t-1)^a
        for _ in 0..b {
            q = poly_div_root(&q, 0.0);
        }
        let mut sign = 1.0;
        for _ in 0..a {
            q = poly_div_root(&q, 1.0);
            sign = -sign;
        }
        let mut fact = 1.0;
        for k in 1..=n {
            fact *= k as f64;
        }
        let scale = sign * (if n % 2 == 0 { 1.0 } else { -1.0 }) / fact
            * 2.0f64.powi(-(a as i32) - (b as i32));
        q.iter().map(|&c| c * scale).collect()
    }

    #[test]
    fn jacobi_matches_rodrigues_oracle() {
        for n in 0..=8usize {
            let poly = rodrigues_poly(n, 1, 1);
            // exact degree n
            assert!(poly.len() == n + 1 && poly[n].abs() > 1e-12);
            for k in 0..=20 {
                let t = -0.5 + 2.0 * k as f64 / 20.0; // includes points outside [0,1]
                let want = poly_eval(&poly, t);
                let got = jacobi_eval(n, 1.0, 1.0, t);
                let scale = want.abs().max(1.0);
                assert!(
                    (want - got).abs() < 1e-10 * scale,
                    "n={n} t={t}: {got} vs oracle {want}"
                );
            }
        }
        // spot values pinned by the oracle
        assert!((jacobi_eval(0, 1.0, 1.0, 0.3) - 0.25).abs() < 1e-15);
        assert!(jacobi_eval(1, 1.0, 1.0, 0.5).abs() < 1e-15);
        let j2_at_0 = poly_eval(&rodrigues_poly(2, 1, 1), 0.0);
        assert!((jacobi_eval(2, 1.0, 1.0, 0.0) - j2_at_0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_deriv_matches_polynomial_derivative() {
        for n in 1..=6usize {
            let dpoly = poly_diff(&rodrigues_poly(n, 1, 1));
            for k in 0..=10 {
                let t = 0.05 + 0.9 * k as f64 / 10.0;
                let want = poly_eval(&dpoly, t);
                let got = jacobi_deriv(n, 1.0, 1.0, t);
                assert!((want - got).abs() < 1e-10 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn jacobi_11_orthogonality_weight_t_1mt() {
        // ∫_0^1 t(1-t) J_i J_j dt = 0 for i ≠ j
        let (xs, ws) = gauss_legendre_01(24);
        let mut diag = [0.0f64; 9];
        for i in 0..=8 {
            for j in 0..=8 {
                let mut s = 0.0;
                for (&x, &w) in xs.iter().zip(&ws) {
                    s += w * x * (1.0 - x) * jacobi_eval(i, 1.0, 1.0, x) * jacobi_eval(j, 1.0, 1.0, x);
                }
                if i == j {
                    diag[i] = s;
                    assert!(s > 0.0);
                } else {
                    assert!(s.abs() < 1e-12 * (diag[i.min(j)].abs().max(1e-30)).sqrt().max(1e-12));
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_basics() {
        let (x, w) = gauss_legendre_01(1);
        assert!((x[0] - 0.5).abs() < 1e-15 && (w[0] - 1.0).abs() < 1e-15);
        // n=2 integrates ξ³ exactly
        let (xs, ws) = gauss_legendre_01(2);
        let s: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * x * x * x).sum();
        assert!((s - 0.25).abs() < 1e-14);
        for n in 1..=12 {
            let (_, ws) = gauss_legendre_01(n);
            let total: f64 = ws.iter().sum();
            assert!((total - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_lobatto_nodes() {
        let x = gauss_lobatto_01(2);
        assert_eq!(x, vec![0.0, 1.0]);
        let x = gauss_lobatto_01(3);
        assert!((x[1] - 0.5).abs() < 1e-15);
        // m=5 nodes against the classical Lobatto values
        let x = gauss_lobatto_01(6);
        let x1 = 0.5 * (1.0 - (1.0f64 / 21.0 * (7.0 + 2.0 * 7.0f64.sqrt())).sqrt());
        let x2 = 0.5 * (1.0 - (1.0f64 / 21.0 * (7.0 - 2.0 * 7.0f64.sqrt())).sqrt());
        assert!((x[1] - x1).abs() < 1e-12);
        assert!((x[2] - x2).abs() < 1e-12);
    }

    #[test]
    fn modal_nodal_modes_and_bubble_roots() {
        let b = Modal1D::identity(4);
        assert!((b.eval(0, 0.3) - 0.7).abs() < 1e-15);
        assert!((b.eval(4, 0.3) - 0.3).abs() < 1e-15);
        for l in 1..4 {
            assert!(b.eval(l, 0.0).abs() < 1e-15);
            assert!(b.eval(l, 1.0).abs() < 1e-15);
        }
    }

    /// Derivative orthonormality at identity stretch: ∫ φ_i' φ_j' = δ_ij for
    /// bubble pairs, and 0 for bubble-nodal pairs.
    #[test]
    fn modal_derivative_orthonormality() {
        let m = 6;
        let b = Modal1D::identity(m);
        let (xs, ws) = gauss_legendre_01(16);
        for i in 1..m {
            for j in 0..=m {
                let s: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(&x, &w)| w * b.deriv(i, x) * b.deriv(j, x))
                    .sum();
                if j == i {
                    assert!((s - 1.0).abs() < 1e-12, "‖φ_{i}'‖² = {s}");
                } else if j >= 1 && j < m {
                    assert!(s.abs() < 1e-12, "bubbles {i},{j} not orthogonal: {s}");
                } else {
                    assert!(s.abs() < 1e-12, "bubble {i} vs nodal {j}: {s}");
                }
            }
        }
        // the ∫ (φ_2')² = 1 example in particular
        let s: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * b.deriv(2, x).powi(2)).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    /// With the stretch applied, the Jacobi argument is interpolated so the
    /// bubble maximum over [a, b] grows only like (b-a)^min(m,2).
    #[test]
    fn stretched_bubble_growth_is_quadratic() {
        let m = 5;
        let mut lens = Vec::new();
        let mut maxima = Vec::new();
        for &len in &[4.0f64, 8.0, 16.0] {
            let a = 0.5 - len / 2.0;
            let bnd = 0.5 + len / 2.0;
            let basis = Modal1D::new(m, (a, bnd));
            let mut mx = 0.0f64;
            for l in 1..m {
                for k in 0..=2000 {
                    let xi = a + (bnd - a) * k as f64 / 2000.0;
                    mx = mx.max(basis.eval(l, xi).abs());
                }
            }
            lens.push(len);
            maxima.push(mx);
        }
        // log-log least-squares exponent
        let lx: Vec<f64> = lens.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = maxima.iter().map(|v| v.ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let slope: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(&x, &y)| (x - mx) * (y - my))
            .sum::<f64>()
            / lx.iter().map(|&x| (x - mx) * (x - mx)).sum::<f64>();
        assert!(slope <= 2.1, "stretched bubble growth exponent {slope} > 2.1");
        assert!(slope >= 1.5, "growth exponent suspiciously low: {slope}");
    }

    #[test]
    fn lagrange_cardinal_properties() {
        let m = 4;
        let lg = Lagrange1D::new(m);
        for i in 0..=m {
            for j in 0..=m {
                let v = lg.eval(i, lg.nodes[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
        // partition of unity anywhere, including far outside [0,1]
        for &xi in &[0.3, -1.0, 3.0] {
            let s: f64 = (0..=m).map(|i| lg.eval(i, xi)).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
        // linear extrapolation
        assert!((lagrange_1d_eval(1, 1, 2.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn mode_set_counts() {
        let ms = build_mode_set(Family::Modal, SpaceKind::Tensor, 3).unwrap();
        assert_eq!(ms.len(), 16);
        assert_eq!(ms.interior_count(), 4);
        let trunk3 = build_mode_set(Family::Modal, SpaceKind::Trunk, 3).unwrap();
        assert_eq!(trunk3.interior_count(), 0);
        let trunk4 = build_mode_set(Family::Modal, SpaceKind::Trunk, 4).unwrap();
        assert_eq!(trunk4.interior_count(), 1);
        let trunk5 = build_mode_set(Family::Modal, SpaceKind::Trunk, 5).unwrap();
        assert_eq!(trunk5.interior_count(), 3);
        for fam in [Family::Lagrangian, Family::Modal] {
            let m1 = build_mode_set(fam, SpaceKind::Trunk, 1).unwrap();
            assert_eq!(m1.len(), 4);
            assert!(m1.modes.iter().all(|md| matches!(md.kface, LocalKFace::Vertex(_))));
        }
        assert!(build_mode_set(Family::Lagrangian, SpaceKind::Trunk, 2).is_err());
    }

    fn identity_basis(family: Family, space: SpaceKind, m: usize) -> LocalBasis {
        let ms = build_mode_set(family, space, m).unwrap();
        let stretch = vec![[None, None]; ms.len()];
        LocalBasis::new(&ms, Point::new(0.0, 0.0), [1.0, 1.0], stretch)
    }

    #[test]
    fn vertex_modes_are_interpolatory_and_stretch_independent() {
        let ms = build_mode_set(Family::Modal, SpaceKind::Tensor, 3).unwrap();
        let mut stretch = vec![[None, None]; ms.len()];
        for (k, md) in ms.modes.iter().enumerate() {
            if md.kface != LocalKFace::Vertex(0) {
                stretch[k] = [Some((-1.0, 2.5)), Some((-0.5, 3.0))];
            }
        }
        // stretches never apply to nodal factors, so vertex modes stay hats
        let lb = LocalBasis::new(&ms, Point::new(0.0, 0.0), [1.0, 1.0], stretch);
        let verts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        for (k, md) in ms.modes.iter().enumerate() {
            if let LocalKFace::Vertex(v) = md.kface {
                for (vi, &p) in verts.iter().enumerate() {
                    let want = if vi == v as usize { 1.0 } else { 0.0 };
                    assert!((lb.eval(k, p) - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn identity_stretch_equals_reference_basis() {
        let m = 4;
        let ms = build_mode_set(Family::Modal, SpaceKind::Tensor, m).unwrap();
        let explicit = vec![[Some((0.0, 1.0)), Some((0.0, 1.0))]; ms.len()];
        let a = LocalBasis::new(&ms, Point::new(0.0, 0.0), [1.0, 1.0], explicit);
        let b = identity_basis(Family::Modal, SpaceKind::Tensor, m);
        let mut t = 0.17f64;
        for _ in 0..20 {
            t = (t * 997.0).fract();
            let p = Point::new(t, (t * 617.0).fract());
            for k in 0..ms.len() {
                assert!((a.eval(k, p) - b.eval(k, p)).abs() < 1e-13);
            }
        }
    }

    /// Analytic gradients against central finite differences for both
    /// families, both spaces, random stretches.
    #[test]
    fn gradients_match_finite_differences() {
        let mut state = 0.37f64;
        let mut next = move || {
            state = (state * 9301.0 + 0.49297).fract();
            state
        };
        for m in 1..=5usize {
            for family in [Family::Lagrangian, Family::Modal] {
                for space in [SpaceKind::Tensor, SpaceKind::Trunk] {
                    let ms = match build_mode_set(family, space, m) {
                        Ok(ms) => ms,
                        Err(_) => continue,
                    };
                    let stretch: Vec<[Option<(f64, f64)>; 2]> = ms
                        .modes
                        .iter()
                        .map(|_| {
                            if family == Family::Modal {
                                let w = 1.0 + 3.0 * next();
                                let off = -0.5 * (w - 1.0);
                                [Some((off, off + w)), Some((off, off + w))]
                            } else {
                                [None, None]
                            }
                        })
                        .collect();
                    let h = [0.25, 0.5];
                    let lb = LocalBasis::new(&ms, Point::new(0.3, -0.2), h, stretch);
                    let step = 1e-6 * h[0].min(h[1]);
                    for k in 0..ms.len() {
                        for _ in 0..50 {
                            let p = Point::new(0.3 + h[0] * next(), -0.2 + h[1] * next());
                            let (_, g) = lb.eval_grad(k, p);
                            let fdx = (lb.eval(k, Point::new(p.x + step, p.y))
                                - lb.eval(k, Point::new(p.x - step, p.y)))
                                / (2.0 * step);
                            let fdy = (lb.eval(k, Point::new(p.x, p.y + step))
                                - lb.eval(k, Point::new(p.x, p.y - step)))
                                / (2.0 * step);
                            let scale = g.norm().max(1.0);
                            assert!(
                                (g.x - fdx).abs() < 1e-6 * scale && (g.y - fdy).abs() < 1e-6 * scale,
                                "m={m} {family:?} {space:?} mode {k}: grad {:?} vs fd ({fdx}, {fdy})",
                                g
                            );
                        }
                    }
                }
            }
        }
    }

    /// Least-squares monomial reproduction on the declared polynomial space.
    #[test]
    fn polynomial_reproduction() {
        use nalgebra::{DMatrix, DVector};
        for m in 1..=4usize {
            for (family, space) in [
                (Family::Lagrangian, SpaceKind::Tensor),
                (Family::Modal, SpaceKind::Tensor),
                (Family::Modal, SpaceKind::Trunk),
            ] {
                let ms = build_mode_set(family, space, m).unwrap();
                // random-ish stretches must not change the span
                let stretch: Vec<[Option<(f64, f64)>; 2]> = ms
                    .modes
                    .iter()
                    .enumerate()
                    .map(|(k, _)| {
                        if family == Family::Modal {
                            let w = 1.0 + 0.5 * ((k % 3) as f64);
                            [Some((-0.25 * (w - 1.0), 1.0 + 0.75 * (w - 1.0))), Some((0.0, w))]
                        } else {
                            [None, None]
                        }
                    })
                    .collect();
                let lb = LocalBasis::new(&ms, Point::new(0.0, 0.0), [1.0, 1.0], stretch);
                let npts = (m + 2) * (m + 2);
                let pts: Vec<Point> = {
                    let g = gauss_lobatto_01(m + 2);
                    let mut v = Vec::with_capacity(npts);
                    for &x in &g {
                        for &y in &g {
                            v.push(Point::new(x, y));
                        }
                    }
                    v
                };
                let a = DMatrix::from_fn(npts, ms.len(), |r, c| lb.eval(c, pts[r]));
                let svd = a.clone().svd(true, true);
                // monomials of the declared space
                let mut mons: Vec<(usize, usize)> = Vec::new();
                for i in 0..=m {
                    for j in 0..=m {
                        let keep = match space {
                            SpaceKind::Tensor => true,
                            SpaceKind::Trunk => {
                                i + j <= m || (i == 1 && j == 1) || (i == m && j == 1) || (i == 1 && j == m)
                            }
                        };
                        if keep {
                            mons.push((i, j));
                        }
                    }
                }
                for (i, j) in mons {
                    let b = DVector::from_fn(npts, |r, _| {
                        pts[r].x.powi(i as i32) * pts[r].y.powi(j as i32)
                    });
                    let coef = svd.solve(&b, 1e-13).expect("least squares failed");
                    let res = (&a * &coef - &b).norm();
                    assert!(
                        res < 1e-10,
                        "{family:?} {space:?} m={m}: monomial x^{i} y^{j} residual {res}"
                    );
                }
            }
        }
    }

    /// Two cells sharing an edge with the same edge stretch produce identical
    /// traces of vertex and edge modes: the stretch does not break C⁰.
    #[test]
    fn c0_compatibility_across_shared_edge() {
        let m = 4;
        let ms = build_mode_set(Family::Modal, SpaceKind::Tensor, m).unwrap();
        // shared edge: top of the lower cell = bottom of the upper cell;
        // tangential (x) stretch tied to the edge, arbitrary elsewhere
        let edge_stretch = (-0.75, 1.5);
        let mk = |cell_lo: Point, edge: u8, other: u8| -> LocalBasis {
            let stretch: Vec<[Option<(f64, f64)>; 2]> = ms
                .modes
                .iter()
                .map(|md| match md.kface {
                    LocalKFace::Edge(e) if e == edge => [Some(edge_stretch), None],
                    LocalKFace::Edge(e) if e == other => [Some((-2.0, 2.0)), None],
                    LocalKFace::Interior => [Some((-1.0, 3.0)), Some((-1.0, 3.0))],
                    _ => [None, None],
                })
                .collect();
            LocalBasis::new(&ms, cell_lo, [1.0, 1.0], stretch)
        };
        let lower = mk(Point::new(0.0, 0.0), 2, 0); // its top edge is shared
        let upper = mk(Point::new(0.0, 1.0), 0, 2); // its bottom edge is shared
        for k in 0..30 {
            let x = k as f64 / 29.0;
            let p = Point::new(x, 1.0);
            // vertex modes: lower v3 == upper v0, lower v2 == upper v1
            let pairs = [
                (LocalKFace::Vertex(3), LocalKFace::Vertex(0)),
                (LocalKFace::Vertex(2), LocalKFace::Vertex(1)),
            ];
            for (kl, ku) in pairs {
                let il = ms.modes.iter().position(|md| md.kface == kl).unwrap();
                let iu = ms.modes.iter().position(|md| md.kface == ku).unwrap();
                assert!((lower.eval(il, p) - upper.eval(iu, p)).abs() < 1e-12);
            }
            // edge modes with matching factor index
            for f in 1..m {
                let il = ms
                    .modes
                    .iter()
                    .position(|md| md.kface == LocalKFace::Edge(2) && md.factors[0] == f)
                    .unwrap();
                let iu = ms
                    .modes
                    .iter()
                    .position(|md| md.kface == LocalKFace::Edge(0) && md.factors[0] == f)
                    .unwrap();
                assert!(
                    (lower.eval(il, p) - upper.eval(iu, p)).abs() < 1e-12,
                    "edge trace mismatch at x={x}, factor {f}"
                );
            }
        }
    }
}
