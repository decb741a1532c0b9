//! Global DOF enumeration with n-face ownership, identification of ill-posed
//! DOFs, and the constraint matrix realising the discrete extension operator
//! from well-posed interior DOFs onto the whole active mesh.

use nalgebra::{DMatrix, DVector};

use crate::aggregation::{aggregate, assign_ipf_owners, build_bmod, AggregateMap, BmodTable, OwnershipMaps};
use crate::bases::{build_mode_set, gauss_lobatto_01, Family, LocalBasis, LocalKFace, ModeSet, SpaceKind};
use crate::geometry::{LevelSet, Point, Vector};
use crate::mesh::{CartesianGrid, CellLabel, Classification, NFaceId, NFaceKind};

/// Global DOF table over the active n-faces. DOFs owned by one n-face are
/// contiguous, slot-major then component-major, so the layout is identical
/// from every cell sharing the face.
#[derive(Clone, Debug)]
pub struct DofTable {
    pub n_components: usize,
    pub n_dofs: usize,
    /// per n-face: first dof id (usize::MAX when the face owns none)
    offset: Vec<usize>,
    /// per n-face: scalar slots owned
    slots: Vec<usize>,
    pub dof_nface: Vec<NFaceId>,
    pub dof_slot: Vec<usize>,
    pub dof_component: Vec<usize>,
}

impl DofTable {
    pub fn build(
        grid: &CartesianGrid,
        cls: &Classification,
        mode_set: &ModeSet,
        n_components: usize,
    ) -> Self {
        let m = mode_set.m;
        let nf = grid.n_nfaces();
        let mut offset = vec![usize::MAX; nf];
        let mut slots = vec![0usize; nf];
        let interior_slots = mode_set.interior_count();
        for id in 0..nf {
            if !cls.is_active_face(id) {
                continue;
            }
            slots[id] = match grid.nface_kind(id) {
                NFaceKind::Vertex => 1,
                NFaceKind::HEdge | NFaceKind::VEdge => m - 1,
                NFaceKind::Cell => interior_slots,
            };
        }
        let mut n_dofs = 0usize;
        let mut dof_nface = Vec::new();
        let mut dof_slot = Vec::new();
        let mut dof_component = Vec::new();
        for id in 0..nf {
            if !cls.is_active_face(id) || slots[id] == 0 {
                continue;
            }
            offset[id] = n_dofs;
            for s in 0..slots[id] {
                for c in 0..n_components {
                    dof_nface.push(id);
                    dof_slot.push(s);
                    dof_component.push(c);
                    n_dofs += 1;
                }
            }
        }
        DofTable { n_components, n_dofs, offset, slots, dof_nface, dof_slot, dof_component }
    }

    pub fn dof(&self, nface: NFaceId, slot: usize, component: usize) -> usize {
        debug_assert!(slot < self.slots[nface]);
        self.offset[nface] + slot * self.n_components + component
    }

    pub fn nface_slots(&self, nface: NFaceId) -> usize {
        self.slots[nface]
    }
}

/// Sparse linear map from well-posed DOFs to all active DOFs. Well-posed rows
/// are unit rows; ill-posed rows carry the extension coefficients, supported
/// on the closure DOFs of a single root cell.
#[derive(Clone, Debug)]
pub struct ConstraintMatrix {
    pub n_active: usize,
    pub n_wp: usize,
    /// active dof -> well-posed column
    pub wp_index: Vec<Option<usize>>,
    /// well-posed column -> active dof
    pub wp_dofs: Vec<usize>,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl ConstraintMatrix {
    /// C · v for a well-posed coefficient vector.
    pub fn extend(&self, v: &DVector<f64>) -> DVector<f64> {
        assert_eq!(v.len(), self.n_wp, "dimension mismatch");
        let mut out = DVector::zeros(self.n_active);
        for (i, row) in self.rows.iter().enumerate() {
            let mut s = 0.0;
            for &(j, c) in row {
                s += c * v[j];
            }
            out[i] = s;
        }
        out
    }

    /// Restriction of an active vector to the well-posed DOFs.
    pub fn restrict(&self, v: &DVector<f64>) -> DVector<f64> {
        assert_eq!(v.len(), self.n_active, "dimension mismatch");
        DVector::from_fn(self.n_wp, |k, _| v[self.wp_dofs[k]])
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.n_active, self.n_wp);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                c[(i, j)] = v;
            }
        }
        c
    }

    /// Largest extension coefficient over the non-trivial (ill-posed) rows.
    pub fn max_abs_coefficient(&self) -> f64 {
        let mut mx = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            if self.wp_index[i].is_some() {
                continue;
            }
            for &(_, c) in row {
                mx = mx.max(c.abs());
            }
        }
        mx
    }
}

/// The assembled aggregated FE space: geometry classification, aggregation
/// maps, stretched local bases, DOF table and constraint matrix.
pub struct AgfeSpace {
    pub grid: CartesianGrid,
    pub cls: Classification,
    pub agg: AggregateMap,
    pub own: OwnershipMaps,
    pub bmod: BmodTable,
    pub mode_set: ModeSet,
    pub dofs: DofTable,
    pub active_cells: Vec<usize>,
    /// per cell: local basis (None for exterior cells)
    pub cell_basis: Vec<Option<LocalBasis>>,
    /// per cell: global dofs in local order (mode-major, component-minor)
    pub cell_dofs: Vec<Vec<usize>>,
    pub constraints: ConstraintMatrix,
}

impl AgfeSpace {
    pub fn build(
        grid: CartesianGrid,
        ls: &LevelSet,
        family: Family,
        space: SpaceKind,
        m: usize,
        n_components: usize,
    ) -> Result<Self, String> {
        let cls = Classification::classify(&grid, ls);
        Self::from_classification(grid, cls, family, space, m, n_components)
    }

    /// Space over a fiat classification (designated interior cells, all other
    /// cells labelled cut with full geometry).
    pub fn build_fiat(
        grid: CartesianGrid,
        interior: &[usize],
        family: Family,
        space: SpaceKind,
        m: usize,
        n_components: usize,
    ) -> Result<Self, String> {
        let cls = Classification::fiat(&grid, interior);
        Self::from_classification(grid, cls, family, space, m, n_components)
    }

    pub fn from_classification(
        grid: CartesianGrid,
        cls: Classification,
        family: Family,
        space: SpaceKind,
        m: usize,
        n_components: usize,
    ) -> Result<Self, String> {
        let agg = aggregate(&grid, &cls)?;
        let own = assign_ipf_owners(&grid, &cls, &agg);
        let bmod = build_bmod(&grid, &cls, &agg);
        let mode_set = build_mode_set(family, space, m)?;
        let dofs = DofTable::build(&grid, &cls, &mode_set, n_components);
        let active_cells = cls.active_cells();

        let mut cell_basis: Vec<Option<LocalBasis>> = vec![None; grid.n_cells()];
        let mut cell_dofs: Vec<Vec<usize>> = vec![Vec::new(); grid.n_cells()];
        for &c in &active_cells {
            cell_basis[c] = Some(build_local_basis(&grid, &cls, &bmod, &mode_set, c));
            cell_dofs[c] = closure_dofs(&grid, &mode_set, &dofs, c);
        }

        let mut sp = AgfeSpace {
            grid,
            cls,
            agg,
            own,
            bmod,
            mode_set,
            dofs,
            active_cells,
            cell_basis,
            cell_dofs,
            constraints: ConstraintMatrix {
                n_active: 0,
                n_wp: 0,
                wp_index: Vec::new(),
                wp_dofs: Vec::new(),
                rows: Vec::new(),
            },
        };
        sp.constraints = build_constraint_matrix(&sp)?;
        Ok(sp)
    }

    pub fn m(&self) -> usize {
        self.mode_set.m
    }

    pub fn n_components(&self) -> usize {
        self.dofs.n_components
    }

    /// The set of ill-posed DOFs: those owned by ill-posed n-faces.
    pub fn ill_posed_dofs(&self) -> Vec<usize> {
        (0..self.dofs.n_dofs)
            .filter(|&d| self.cls.is_ill_posed_face(self.dofs.dof_nface[d]))
            .collect()
    }

    /// Which cell contains a point (clamped to the grid).
    pub fn locate(&self, p: Point) -> usize {
        let ix = (((p.x - self.grid.origin.x) / self.grid.h[0]).floor() as i64)
            .clamp(0, self.grid.nx() as i64 - 1) as usize;
        let iy = (((p.y - self.grid.origin.y) / self.grid.h[1]).floor() as i64)
            .clamp(0, self.grid.ny() as i64 - 1) as usize;
        self.grid.cell_index(ix, iy)
    }

    /// FE function evaluation (value and gradient per component) from an
    /// active coefficient vector at a point of the given cell.
    pub fn eval_fe(
        &self,
        cell: usize,
        active: &DVector<f64>,
        p: Point,
        values: &mut [f64],
        grads: &mut [Vector],
    ) {
        let nc = self.n_components();
        let basis = self.cell_basis[cell].as_ref().expect("exterior cell");
        let dofs = &self.cell_dofs[cell];
        for v in values.iter_mut() {
            *v = 0.0;
        }
        for g in grads.iter_mut() {
            *g = Vector::zeros();
        }
        for (k, chunk) in dofs.chunks(nc).enumerate() {
            let (val, grad) = basis.eval_grad(k, p);
            for (c, &d) in chunk.iter().enumerate() {
                values[c] += active[d] * val;
                grads[c] += grad * active[d];
            }
        }
    }

    /// Interpolates component functions into the active DOF vector: nodal
    /// values for Lagrangian DOFs; for the modal family a cell-wise
    /// collocation fit, exact whenever the function lies in the local space.
    pub fn interpolate(&self, f: &dyn Fn(Point, usize) -> f64) -> DVector<f64> {
        let nc = self.n_components();
        let mut out = DVector::zeros(self.dofs.n_dofs);
        match self.mode_set.family {
            Family::Lagrangian => {
                let nodes = gauss_lobatto_01(self.m() + 1);
                for d in 0..self.dofs.n_dofs {
                    let p = self.lagrangian_node_point(d, &nodes);
                    out[d] = f(p, self.dofs.dof_component[d]);
                }
            }
            Family::Modal => {
                let npts = self.m() + 1;
                let nodes = gauss_lobatto_01(npts);
                let mut seen = vec![false; self.dofs.n_dofs];
                for &cell in &self.active_cells {
                    let basis = self.cell_basis[cell].as_ref().unwrap();
                    let (lo, hi) = self.grid.cell_box(cell);
                    let mut pts = Vec::with_capacity(npts * npts);
                    for &x in &nodes {
                        for &y in &nodes {
                            pts.push(Point::new(
                                lo.x + x * (hi.x - lo.x),
                                lo.y + y * (hi.y - lo.y),
                            ));
                        }
                    }
                    let nmodes = basis.n_modes();
                    let v = DMatrix::from_fn(pts.len(), nmodes, |r, k| basis.eval(k, pts[r]));
                    let svd = v.svd(true, true);
                    for c in 0..nc {
                        let b = DVector::from_fn(pts.len(), |r, _| f(pts[r], c));
                        let coef = svd.solve(&b, 1e-12).expect("local collocation failed");
                        for k in 0..nmodes {
                            let d = self.cell_dofs[cell][k * nc + c];
                            if !seen[d] {
                                out[d] = coef[k];
                                seen[d] = true;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Physical node point of a Lagrangian DOF.
    pub fn lagrangian_node_point(&self, dof: usize, nodes: &[f64]) -> Point {
        let nf = self.dofs.dof_nface[dof];
        let slot = self.dofs.dof_slot[dof];
        let (a, b) = self.grid.nface_box(nf);
        match self.grid.nface_kind(nf) {
            NFaceKind::Vertex => a,
            NFaceKind::HEdge => Point::new(a.x + nodes[slot + 1] * (b.x - a.x), a.y),
            NFaceKind::VEdge => Point::new(a.x, a.y + nodes[slot + 1] * (b.y - a.y)),
            NFaceKind::Cell => {
                let n_in = self.m() - 1;
                let (i, j) = (slot / n_in, slot % n_in);
                Point::new(
                    a.x + nodes[i + 1] * (b.x - a.x),
                    a.y + nodes[j + 1] * (b.y - a.y),
                )
            }
        }
    }
}

/// Local basis of a cell: modal bubble factors of well-posed k-face modes are
/// stretched over the owning face's box; modes on ill-posed faces keep the
/// identity stretch (their coefficients come from the constraints anyway).
fn build_local_basis(
    grid: &CartesianGrid,
    cls: &Classification,
    bmod: &BmodTable,
    mode_set: &ModeSet,
    cell: usize,
) -> LocalBasis {
    let (lo, hi) = grid.cell_box(cell);
    let h = [hi.x - lo.x, hi.y - lo.y];
    let closure = grid.cell_closure(cell);
    let mut stretch: Vec<[Option<(f64, f64)>; 2]> = vec![[None, None]; mode_set.len()];
    if mode_set.family == Family::Modal {
        for (k, md) in mode_set.modes.iter().enumerate() {
            let target: Option<(NFaceId, [bool; 2])> = match md.kface {
                LocalKFace::Vertex(_) => None,
                LocalKFace::Edge(e) => {
                    // stretch only the tangential (bubble) axis
                    let horizontal = e == 0 || e == 2;
                    Some((closure[4 + e as usize], [horizontal, !horizontal]))
                }
                LocalKFace::Interior => Some((closure[8], [true, true])),
            };
            if let Some((nf, axes)) = target {
                if cls.in_faces[nf] {
                    if let Some((blo, bhi)) = bmod.get(nf) {
                        let iv = [
                            ((blo.x - lo.x) / h[0], (bhi.x - lo.x) / h[0]),
                            ((blo.y - lo.y) / h[1], (bhi.y - lo.y) / h[1]),
                        ];
                        for ax in 0..2 {
                            if axes[ax] {
                                if iv[ax].1 - iv[ax].0 > 1e-9 {
                                    stretch[k][ax] = Some(iv[ax]);
                                } else {
                                    eprintln!(
                                        "warning: degenerate stretch box on n-face {nf}, axis {ax}; \
                                         falling back to the cell extent"
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    LocalBasis::new(mode_set, lo, h, stretch)
}

/// Global dofs of the cell closure in local mode order (component-minor).
fn closure_dofs(
    grid: &CartesianGrid,
    mode_set: &ModeSet,
    dofs: &DofTable,
    cell: usize,
) -> Vec<usize> {
    let closure = grid.cell_closure(cell);
    let nc = dofs.n_components;
    let mut out = Vec::with_capacity(mode_set.len() * nc);
    let mut interior_seen = 0usize;
    for md in &mode_set.modes {
        let (nf, slot) = match md.kface {
            LocalKFace::Vertex(v) => (closure[v as usize], 0),
            LocalKFace::Edge(e) => {
                let tangential = if e == 0 || e == 2 { md.factors[0] } else { md.factors[1] };
                (closure[4 + e as usize], tangential - 1)
            }
            LocalKFace::Interior => {
                let s = interior_seen;
                interior_seen += 1;
                (closure[8], s)
            }
        };
        for c in 0..nc {
            out.push(dofs.dof(nf, slot, c));
        }
    }
    out
}

/// Assembles the constraint matrix: unit rows for well-posed DOFs, extension
/// coefficients for ill-posed ones. For the Lagrangian family each ill-posed
/// coefficient is the extended root shape function evaluated at the DOF's
/// node; in general the coefficients come from collocating the extended root
/// functions at a unisolvent point set of the constrained cell and solving
/// its local Vandermonde system.
fn build_constraint_matrix(sp: &AgfeSpace) -> Result<ConstraintMatrix, String> {
    let n_active = sp.dofs.n_dofs;
    let nc = sp.n_components();
    let mut wp_index = vec![None; n_active];
    let mut wp_dofs = Vec::new();
    for d in 0..n_active {
        if !sp.cls.is_ill_posed_face(sp.dofs.dof_nface[d]) {
            wp_index[d] = Some(wp_dofs.len());
            wp_dofs.push(d);
        }
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_active];
    for (col, &d) in wp_dofs.iter().enumerate() {
        rows[d].push((col, 1.0));
    }

    match sp.mode_set.family {
        Family::Lagrangian => {
            let nodes = gauss_lobatto_01(sp.m() + 1);
            for d in 0..n_active {
                if wp_index[d].is_some() {
                    continue;
                }
                let x = sp.lagrangian_node_point(d, &nodes);
                let comp = sp.dofs.dof_component[d];
                let nf = sp.dofs.dof_nface[d];
                let agg_id = sp.own.owner(nf).expect("ill-posed face without owner");
                let root = sp.agg.agg_root[agg_id];
                let rb = sp.cell_basis[root].as_ref().unwrap();
                let rdofs = &sp.cell_dofs[root];
                for k in 0..rb.n_modes() {
                    let coef = rb.eval(k, x);
                    let beta = rdofs[k * nc + comp];
                    let col = wp_index[beta].expect("root closure dof not well-posed");
                    if coef != 0.0 {
                        rows[d].push((col, coef));
                    }
                }
            }
        }
        Family::Modal => {
            // canonical computing cell per ill-posed face: smallest cut cell
            let mut canon: Vec<Option<usize>> = vec![None; sp.grid.n_nfaces()];
            for id in sp.cls.ipf_faces() {
                let k = sp
                    .grid
                    .nface_cells(id)
                    .into_iter()
                    .filter(|&c| sp.cls.labels[c] == CellLabel::Cut)
                    .min()
                    .expect("ill-posed face must belong to a cut cell");
                canon[id] = Some(k);
            }
            for &cell in &sp.active_cells {
                if sp.cls.labels[cell] != CellLabel::Cut {
                    continue;
                }
                // ill-posed modes of this cell computed here, grouped by owner
                let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
                let closure = sp.grid.cell_closure(cell);
                for (k, md) in sp.mode_set.modes.iter().enumerate() {
                    let nf = match md.kface {
                        LocalKFace::Vertex(v) => closure[v as usize],
                        LocalKFace::Edge(e) => closure[4 + e as usize],
                        LocalKFace::Interior => closure[8],
                    };
                    if !sp.cls.is_ill_posed_face(nf) || canon[nf] != Some(cell) {
                        continue;
                    }
                    let a = sp.own.owner(nf).unwrap();
                    match groups.iter_mut().find(|(g, _)| *g == a) {
                        Some((_, list)) => list.push(k),
                        None => groups.push((a, vec![k])),
                    }
                }
                if groups.is_empty() {
                    continue;
                }
                // collocation points: tensor Gauss-Lobatto of this cell
                let (lo, hi) = sp.grid.cell_box(cell);
                let gl = gauss_lobatto_01(sp.m() + 1);
                let mut pts = Vec::with_capacity(gl.len() * gl.len());
                for &x in &gl {
                    for &y in &gl {
                        pts.push(Point::new(lo.x + x * (hi.x - lo.x), lo.y + y * (hi.y - lo.y)));
                    }
                }
                let kb = sp.cell_basis[cell].as_ref().unwrap();
                let v = DMatrix::from_fn(pts.len(), kb.n_modes(), |r, k| kb.eval(k, pts[r]));
                let svd = v.clone().svd(true, true);
                let tol = 1e-12 * svd.singular_values.max();
                for (agg_id, modes) in groups {
                    let root = sp.agg.agg_root[agg_id];
                    let rb = sp.cell_basis[root].as_ref().unwrap();
                    let rdofs = &sp.cell_dofs[root];
                    for beta_k in 0..rb.n_modes() {
                        let b = DVector::from_fn(pts.len(), |r, _| rb.eval(beta_k, pts[r]));
                        let coef = svd
                            .solve(&b, tol)
                            .map_err(|e| format!("singular local system on cell {cell}: {e}"))?;
                        let resid = (&v * &coef - &b).norm() / b.norm().max(1.0);
                        if resid > 1e-8 {
                            return Err(format!(
                                "local Vandermonde on cell {cell} left residual {resid:.3e}"
                            ));
                        }
                        for &k in &modes {
                            let c = coef[k];
                            if c.abs() < 1e-14 {
                                continue;
                            }
                            for comp in 0..nc {
                                let alpha = sp.cell_dofs[cell][k * nc + comp];
                                let beta = rdofs[beta_k * nc + comp];
                                let col = wp_index[beta].expect("root closure dof not well-posed");
                                rows[alpha].push((col, c));
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(ConstraintMatrix { n_active, n_wp: wp_dofs.len(), wp_index, wp_dofs, rows })
}

/// The collocation realisation of one constraint row, usable for either
/// family; for Lagrangian bases it must coincide with direct point
/// evaluation. Returns coefficients over the root closure modes.
pub fn constraint_row_vandermonde(
    sp: &AgfeSpace,
    cut_cell: usize,
    local_mode: usize,
    root: usize,
) -> Vec<f64> {
    let (lo, hi) = sp.grid.cell_box(cut_cell);
    let gl = gauss_lobatto_01(sp.m() + 1);
    let mut pts = Vec::with_capacity(gl.len() * gl.len());
    for &x in &gl {
        for &y in &gl {
            pts.push(Point::new(lo.x + x * (hi.x - lo.x), lo.y + y * (hi.y - lo.y)));
        }
    }
    let kb = sp.cell_basis[cut_cell].as_ref().unwrap();
    let v = DMatrix::from_fn(pts.len(), kb.n_modes(), |r, k| kb.eval(k, pts[r]));
    let svd = v.svd(true, true);
    let rb = sp.cell_basis[root].as_ref().unwrap();
    (0..rb.n_modes())
        .map(|beta_k| {
            let b = DVector::from_fn(pts.len(), |r, _| rb.eval(beta_k, pts[r]));
            let coef = svd.solve(&b, 1e-12).expect("collocation solve failed");
            coef[local_mode]
        })
        .collect()
}
