//! Uniform Cartesian background grid, its n-face complex, and the
//! classification of cells and n-faces against the physical domain.

use crate::geometry::{clip_cell, CutCellGeometry, CutStatus, LevelSet, Point};

/// Uniform Cartesian partition of the artificial domain.
#[derive(Clone, Debug)]
pub struct CartesianGrid {
    pub origin: Point,
    /// Cell size per axis.
    pub h: [f64; 2],
    /// Cell counts per axis.
    pub counts: [usize; 2],
}

/// Flat n-face id. Section layout: vertices, horizontal edges, vertical
/// edges, cells.
pub type NFaceId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NFaceKind {
    Vertex,
    /// Edge parallel to the x axis.
    HEdge,
    /// Edge parallel to the y axis.
    VEdge,
    Cell,
}

impl NFaceKind {
    pub fn dim(self) -> usize {
        match self {
            NFaceKind::Vertex => 0,
            NFaceKind::HEdge | NFaceKind::VEdge => 1,
            NFaceKind::Cell => 2,
        }
    }
}

impl CartesianGrid {
    pub fn new(origin: Point, h: [f64; 2], counts: [usize; 2]) -> Self {
        assert!(h[0] > 0.0 && h[1] > 0.0, "cell size must be positive");
        assert!(counts[0] >= 1 && counts[1] >= 1, "cell counts must be at least 1");
        CartesianGrid { origin, h, counts }
    }

    /// Grid over `box` with the given per-axis cell counts.
    pub fn from_box(lo: Point, hi: Point, counts: [usize; 2]) -> Self {
        assert!(hi.x > lo.x && hi.y > lo.y, "box must have positive volume");
        let h = [(hi.x - lo.x) / counts[0] as f64, (hi.y - lo.y) / counts[1] as f64];
        CartesianGrid::new(lo, h, counts)
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.counts[0]
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.counts[1]
    }

    pub fn n_cells(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn n_vertices(&self) -> usize {
        (self.nx() + 1) * (self.ny() + 1)
    }

    pub fn n_hedges(&self) -> usize {
        self.nx() * (self.ny() + 1)
    }

    pub fn n_vedges(&self) -> usize {
        (self.nx() + 1) * self.ny()
    }

    pub fn n_edges(&self) -> usize {
        self.n_hedges() + self.n_vedges()
    }

    pub fn n_nfaces(&self) -> usize {
        self.n_vertices() + self.n_edges() + self.n_cells()
    }

    /// Cell diameter (h·√2 for square cells).
    pub fn cell_diameter(&self) -> f64 {
        (self.h[0] * self.h[0] + self.h[1] * self.h[1]).sqrt()
    }

    #[inline]
    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    #[inline]
    pub fn cell_coords(&self, c: usize) -> (usize, usize) {
        (c % self.nx(), c / self.nx())
    }

    pub fn cell_box(&self, c: usize) -> (Point, Point) {
        let (ix, iy) = self.cell_coords(c);
        let lo = Point::new(
            self.origin.x + ix as f64 * self.h[0],
            self.origin.y + iy as f64 * self.h[1],
        );
        let hi = Point::new(lo.x + self.h[0], lo.y + self.h[1]);
        (lo, hi)
    }

    pub fn vertex_point(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.origin.x + ix as f64 * self.h[0],
            self.origin.y + iy as f64 * self.h[1],
        )
    }

    // ---- flat n-face ids ----

    #[inline]
    pub fn vertex_id(&self, ix: usize, iy: usize) -> NFaceId {
        iy * (self.nx() + 1) + ix
    }

    #[inline]
    pub fn hedge_id(&self, ix: usize, iy: usize) -> NFaceId {
        self.n_vertices() + iy * self.nx() + ix
    }

    #[inline]
    pub fn vedge_id(&self, ix: usize, iy: usize) -> NFaceId {
        self.n_vertices() + self.n_hedges() + iy * (self.nx() + 1) + ix
    }

    #[inline]
    pub fn cell_nface_id(&self, c: usize) -> NFaceId {
        self.n_vertices() + self.n_edges() + c
    }

    pub fn nface_kind(&self, id: NFaceId) -> NFaceKind {
        if id < self.n_vertices() {
            NFaceKind::Vertex
        } else if id < self.n_vertices() + self.n_hedges() {
            NFaceKind::HEdge
        } else if id < self.n_vertices() + self.n_edges() {
            NFaceKind::VEdge
        } else {
            NFaceKind::Cell
        }
    }

    /// Geometric extent of an n-face (degenerate box for vertices/edges).
    pub fn nface_box(&self, id: NFaceId) -> (Point, Point) {
        match self.nface_kind(id) {
            NFaceKind::Vertex => {
                let k = id;
                let ix = k % (self.nx() + 1);
                let iy = k / (self.nx() + 1);
                let p = self.vertex_point(ix, iy);
                (p, p)
            }
            NFaceKind::HEdge => {
                let k = id - self.n_vertices();
                let ix = k % self.nx();
                let iy = k / self.nx();
                let a = self.vertex_point(ix, iy);
                let b = self.vertex_point(ix + 1, iy);
                (a, b)
            }
            NFaceKind::VEdge => {
                let k = id - self.n_vertices() - self.n_hedges();
                let ix = k % (self.nx() + 1);
                let iy = k / (self.nx() + 1);
                let a = self.vertex_point(ix, iy);
                let b = self.vertex_point(ix, iy + 1);
                (a, b)
            }
            NFaceKind::Cell => self.cell_box(id - self.n_vertices() - self.n_edges()),
        }
    }

    /// The 9 n-faces in the closure of a cell: 4 vertices, 4 edges, the cell.
    pub fn cell_closure(&self, c: usize) -> [NFaceId; 9] {
        let (ix, iy) = self.cell_coords(c);
        [
            self.vertex_id(ix, iy),
            self.vertex_id(ix + 1, iy),
            self.vertex_id(ix + 1, iy + 1),
            self.vertex_id(ix, iy + 1),
            self.hedge_id(ix, iy),
            self.vedge_id(ix + 1, iy),
            self.hedge_id(ix, iy + 1),
            self.vedge_id(ix, iy),
            self.cell_nface_id(c),
        ]
    }

    /// Cells adjacent to `c` through any shared n-face, together with the
    /// dimension of the highest-dimensional shared face (1 for edge
    /// neighbours, 0 for vertex-only neighbours).
    pub fn cell_neighbors(&self, c: usize) -> Vec<(usize, usize)> {
        let (ix, iy) = self.cell_coords(c);
        let mut out = Vec::with_capacity(8);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let jx = ix as i64 + dx;
                let jy = iy as i64 + dy;
                if jx < 0 || jy < 0 || jx >= self.nx() as i64 || jy >= self.ny() as i64 {
                    continue;
                }
                let shared_dim = if dx == 0 || dy == 0 { 1 } else { 0 };
                out.push((self.cell_index(jx as usize, jy as usize), shared_dim));
            }
        }
        out
    }

    /// Cells containing n-face `id` in their closure.
    pub fn nface_cells(&self, id: NFaceId) -> Vec<usize> {
        let nx = self.nx() as i64;
        let ny = self.ny() as i64;
        let mut out = Vec::with_capacity(4);
        let mut push = |ix: i64, iy: i64| {
            if ix >= 0 && iy >= 0 && ix < nx && iy < ny {
                out.push(self.cell_index(ix as usize, iy as usize));
            }
        };
        match self.nface_kind(id) {
            NFaceKind::Vertex => {
                let k = id as i64;
                let ix = k % (nx + 1);
                let iy = k / (nx + 1);
                push(ix - 1, iy - 1);
                push(ix, iy - 1);
                push(ix - 1, iy);
                push(ix, iy);
            }
            NFaceKind::HEdge => {
                let k = (id - self.n_vertices()) as i64;
                let ix = k % nx;
                let iy = k / nx;
                push(ix, iy - 1);
                push(ix, iy);
            }
            NFaceKind::VEdge => {
                let k = (id - self.n_vertices() - self.n_hedges()) as i64;
                let ix = k % (nx + 1);
                let iy = k / (nx + 1);
                push(ix - 1, iy);
                push(ix, iy);
            }
            NFaceKind::Cell => out.push(id - self.n_vertices() - self.n_edges()),
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellLabel {
    In,
    Cut,
    Out,
}

/// Ω-classification of cells with the per-cell cut geometry cached, plus the
/// derived n-face sets.
#[derive(Clone, Debug)]
pub struct Classification {
    pub labels: Vec<CellLabel>,
    pub cut_geo: Vec<CutCellGeometry>,
    /// n-face membership masks over the flat id space.
    pub in_faces: Vec<bool>,
    pub cut_faces: Vec<bool>,
}

impl Classification {
    /// Classifies every cell of the grid by clipping it against the level set.
    pub fn classify(grid: &CartesianGrid, ls: &LevelSet) -> Self {
        let n = grid.n_cells();
        let mut labels = Vec::with_capacity(n);
        let mut cut_geo = Vec::with_capacity(n);
        for c in 0..n {
            let (lo, hi) = grid.cell_box(c);
            let g = clip_cell(lo, hi, ls);
            labels.push(match g.status {
                CutStatus::Full => CellLabel::In,
                CutStatus::Empty => CellLabel::Out,
                CutStatus::Cut => CellLabel::Cut,
            });
            cut_geo.push(g);
        }
        Self::from_parts(grid, labels, cut_geo)
    }

    /// Classification by fiat: the given cells are interior, all others cut,
    /// and every cell carries its full geometry. Used by the conditioning
    /// studies where "cut" is a label, not a geometric fact.
    pub fn fiat(grid: &CartesianGrid, interior: &[usize]) -> Self {
        let n = grid.n_cells();
        let mut labels = vec![CellLabel::Cut; n];
        for &c in interior {
            labels[c] = CellLabel::In;
        }
        let cut_geo = (0..n)
            .map(|c| {
                let (lo, hi) = grid.cell_box(c);
                CutCellGeometry::full(lo, hi)
            })
            .collect();
        Self::from_parts(grid, labels, cut_geo)
    }

    fn from_parts(grid: &CartesianGrid, labels: Vec<CellLabel>, cut_geo: Vec<CutCellGeometry>) -> Self {
        let nf = grid.n_nfaces();
        let mut in_faces = vec![false; nf];
        let mut cut_faces = vec![false; nf];
        for c in 0..labels.len() {
            let mask = match labels[c] {
                CellLabel::In => &mut in_faces,
                CellLabel::Cut => &mut cut_faces,
                CellLabel::Out => continue,
            };
            for id in grid.cell_closure(c) {
                mask[id] = true;
            }
        }
        Classification { labels, cut_geo, in_faces, cut_faces }
    }

    pub fn is_active(&self, cell: usize) -> bool {
        self.labels[cell] != CellLabel::Out
    }

    pub fn cells_with(&self, label: CellLabel) -> Vec<usize> {
        (0..self.labels.len()).filter(|&c| self.labels[c] == label).collect()
    }

    pub fn active_cells(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&c| self.is_active(c)).collect()
    }

    /// Active n-faces: faces of IN or CUT cells.
    pub fn is_active_face(&self, id: NFaceId) -> bool {
        self.in_faces[id] || self.cut_faces[id]
    }

    /// Ill-posed n-faces C^ipf = C^cut \ C^in.
    pub fn is_ill_posed_face(&self, id: NFaceId) -> bool {
        self.cut_faces[id] && !self.in_faces[id]
    }

    pub fn ipf_faces(&self) -> Vec<NFaceId> {
        (0..self.in_faces.len()).filter(|&id| self.is_ill_posed_face(id)).collect()
    }
}
