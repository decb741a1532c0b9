//! Cell aggregation: each aggregate is one interior root cell plus the cut
//! cells attached to it by a multi-source breadth-first growth, together with
//! the ownership maps for ill-posed n-faces and the stretched bounding boxes
//! used by the generalised modal bases.

use crate::geometry::Point;
use crate::mesh::{CartesianGrid, CellLabel, Classification, NFaceId, NFaceKind};

#[derive(Clone, Debug)]
pub struct AggregateMap {
    /// cell -> aggregate id; None for exterior cells.
    pub cell_to_agg: Vec<Option<usize>>,
    /// aggregate id -> root cell (bijection with the interior cells).
    pub agg_root: Vec<usize>,
    /// aggregate id -> member cells, root first, then in assignment order.
    pub agg_members: Vec<Vec<usize>>,
    /// Per-aggregate diameter (of the union of member cell boxes).
    pub agg_diam: Vec<f64>,
    /// Diameter of a (root) cell.
    pub root_diam: f64,
}

impl AggregateMap {
    pub fn n_aggregates(&self) -> usize {
        self.agg_root.len()
    }

    /// aggregate of an interior cell (the inverse of `agg_root`).
    pub fn agg_of_root(&self, cell: usize) -> usize {
        self.cell_to_agg[cell].expect("root cell must be assigned")
    }
}

/// Grows aggregates by breadth-first attachment of cut cells to interior
/// seeds. Every unassigned cut cell adjacent (through any shared n-face) to
/// an assigned cell joins the aggregate of one neighbour; ties are broken by
/// smallest BFS level, then highest shared-face dimension (facet neighbours
/// beat corner neighbours), then smallest root-cell index.
pub fn aggregate(grid: &CartesianGrid, cls: &Classification) -> Result<AggregateMap, String> {
    let n = grid.n_cells();
    let mut cell_to_agg: Vec<Option<usize>> = vec![None; n];
    let mut level: Vec<usize> = vec![usize::MAX; n];
    let mut agg_root: Vec<usize> = Vec::new();
    let mut agg_members: Vec<Vec<usize>> = Vec::new();

    for c in 0..n {
        if cls.labels[c] == CellLabel::In {
            let a = agg_root.len();
            cell_to_agg[c] = Some(a);
            level[c] = 0;
            agg_root.push(c);
            agg_members.push(vec![c]);
        }
    }
    if agg_root.is_empty() {
        return Err("no interior cell exists; the mesh cannot seed any aggregate".to_string());
    }

    let mut pending: Vec<usize> = cls.cells_with(CellLabel::Cut);
    let mut current_level = 0usize;
    while !pending.is_empty() {
        current_level += 1;
        // choose the target aggregate for every attachable cell before
        // committing any assignment, so the growth is level-synchronous
        let mut batch: Vec<(usize, usize)> = Vec::new();
        for &c in &pending {
            let mut best: Option<(usize, usize, usize, usize)> = None; // (level, 2-shared_dim, root, agg)
            for (nb, shared_dim) in grid.cell_neighbors(c) {
                if let Some(a) = cell_to_agg[nb] {
                    let key = (level[nb], 2 - shared_dim, agg_root[a], a);
                    if best.map_or(true, |b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                        best = Some(key);
                    }
                }
            }
            if let Some((_, _, _, a)) = best {
                batch.push((c, a));
            }
        }
        if batch.is_empty() {
            let c = pending[0];
            let (ix, iy) = grid.cell_coords(c);
            return Err(format!(
                "cut cell ({ix}, {iy}) is unreachable from any interior cell; \
                 the mesh resolution is insufficient"
            ));
        }
        for &(c, a) in &batch {
            cell_to_agg[c] = Some(a);
            level[c] = current_level;
            agg_members[a].push(c);
        }
        pending.retain(|&c| cell_to_agg[c].is_none());
    }

    let mut agg_diam = Vec::with_capacity(agg_root.len());
    for members in &agg_members {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &c in members {
            let (a, b) = grid.cell_box(c);
            lo.x = lo.x.min(a.x);
            lo.y = lo.y.min(a.y);
            hi.x = hi.x.max(b.x);
            hi.y = hi.y.max(b.y);
        }
        agg_diam.push((hi - lo).norm());
    }

    Ok(AggregateMap {
        cell_to_agg,
        agg_root,
        agg_members,
        agg_diam,
        root_diam: grid.cell_diameter(),
    })
}

/// Ill-posed n-face -> owning aggregate.
#[derive(Clone, Debug)]
pub struct OwnershipMaps {
    pub nf_to_agg: Vec<Option<usize>>,
}

impl OwnershipMaps {
    pub fn owner(&self, id: NFaceId) -> Option<usize> {
        self.nf_to_agg[id]
    }
}

/// Maps each ill-posed n-face to the touching aggregate with the smallest
/// root-cell index.
pub fn assign_ipf_owners(
    grid: &CartesianGrid,
    cls: &Classification,
    agg: &AggregateMap,
) -> OwnershipMaps {
    let mut nf_to_agg = vec![None; grid.n_nfaces()];
    for id in cls.ipf_faces() {
        let mut best: Option<(usize, usize)> = None; // (root index, agg)
        for c in grid.nface_cells(id) {
            if let Some(a) = agg.cell_to_agg[c] {
                let key = (agg.agg_root[a], a);
                if best.map_or(true, |b| key.0 < b.0) {
                    best = Some(key);
                }
            }
        }
        nf_to_agg[id] = Some(best.expect("ill-posed face must touch an aggregated cell").1);
    }
    OwnershipMaps { nf_to_agg }
}

/// Axis-aligned boxes over which high-order modes are stretched: one per
/// interior cell and one per lower-dimensional interior n-face.
#[derive(Clone, Debug)]
pub struct BmodTable {
    pub boxes: Vec<Option<(Point, Point)>>,
}

impl BmodTable {
    pub fn get(&self, id: NFaceId) -> Option<(Point, Point)> {
        self.boxes[id]
    }
}

/// Bounding box of aggregate ∩ Ω, assembled from the clipped interior
/// polygons of the member cells.
fn aggregate_omega_box(cls: &Classification, members: &[usize]) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &c in members {
        for poly in &cls.cut_geo[c].polygons {
            for p in poly {
                lo.x = lo.x.min(p.x);
                lo.y = lo.y.min(p.y);
                hi.x = hi.x.max(p.x);
                hi.y = hi.y.max(p.y);
            }
        }
    }
    (lo, hi)
}

/// Builds the stretch boxes of Ω-clipped aggregates: the box of an interior
/// cell is the box of its aggregate ∩ Ω; the box of an interior n-face is the
/// union of the boxes of the aggregates of all interior cells containing it.
pub fn build_bmod(grid: &CartesianGrid, cls: &Classification, agg: &AggregateMap) -> BmodTable {
    let agg_box: Vec<(Point, Point)> = agg
        .agg_members
        .iter()
        .map(|members| aggregate_omega_box(cls, members))
        .collect();

    let mut boxes = vec![None; grid.n_nfaces()];
    for id in 0..grid.n_nfaces() {
        if !cls.in_faces[id] {
            continue;
        }
        match grid.nface_kind(id) {
            NFaceKind::Cell => {
                let c = grid.nface_cells(id)[0];
                if cls.labels[c] == CellLabel::In {
                    boxes[id] = Some(agg_box[agg.agg_of_root(c)]);
                }
            }
            _ => {
                let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                let mut any = false;
                for c in grid.nface_cells(id) {
                    if cls.labels[c] == CellLabel::In {
                        let (a, b) = agg_box[agg.agg_of_root(c)];
                        lo.x = lo.x.min(a.x);
                        lo.y = lo.y.min(a.y);
                        hi.x = hi.x.max(b.x);
                        hi.y = hi.y.max(b.y);
                        any = true;
                    }
                }
                if any {
                    boxes[id] = Some((lo, hi));
                }
            }
        }
    }
    BmodTable { boxes }
}
