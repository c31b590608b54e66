//! Structured meshes: rectangular 2D floodplain blocks, the 1D channel grid
//! with its two lateral subcells per cell, and the edge adjacency between
//! 1D cells and 2D boundary cells.
//!
//! Blocks may meet each other (full-2D mode glues the channel region to the
//! floodplain) and may meet the channel strip along its north or south line.
//! Grids need not be conforming along a seam: edges are built from interval
//! overlaps, so 1:1, nested and staggered resolutions all work. Channels are
//! x-aligned; side normals are exactly (0, 1) and (0, -1).

use crate::geometry::ChannelCrossSection;
use crate::{Error, Result};

/// Boundary treatment for one side of a block or one end of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Closed wall: ghost mirrors the interior with normal momentum negated.
    Wall,
    /// Open (zero-gradient) outflow: ghost copies the interior.
    Open,
    /// Time-dependent prescribed water depth; discharge is zero-gradient.
    InflowDepth,
}

/// Sides of a rectangular block, in storage order west, east, south, north.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSide {
    West = 0,
    East = 1,
    South = 2,
    North = 3,
}

/// Lateral side of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSide {
    North,
    South,
}

impl ChannelSide {
    /// Outward unit normal of this channel side (x-aligned channels).
    pub fn normal(self) -> (f64, f64) {
        match self {
            ChannelSide::North => (0.0, 1.0),
            ChannelSide::South => (0.0, -1.0),
        }
    }
}

/// One structured rectangular grid block.
#[derive(Debug, Clone)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// South-west corner.
    pub origin: (f64, f64),
    /// Cell bed elevations, row-major (`iy * nx + ix`).
    pub bed: Vec<f64>,
    pub manning: f64,
    /// Boundary tags per side, indexed by `BlockSide`.
    pub boundaries: [BoundaryKind; 4],
}

impl Grid2D {
    pub fn x1(&self) -> f64 {
        self.origin.0 + self.nx as f64 * self.dx
    }
    pub fn y1(&self) -> f64 {
        self.origin.1 + self.ny as f64 * self.dy
    }
}

/// Flattened cell of the assembled mesh.
#[derive(Debug, Clone, Copy)]
pub struct Cell2D {
    pub center: (f64, f64),
    pub dx: f64,
    pub dy: f64,
    pub area: f64,
    pub bed: f64,
    pub manning: f64,
    pub block: usize,
}

/// The neighbour on the far side of a 2D edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Cell(usize),
    Boundary(BoundaryKind),
}

/// One finite-volume edge. `normal` points away from cell `a`.
#[derive(Debug, Clone, Copy)]
pub struct Edge2D {
    pub a: usize,
    pub b: Neighbor,
    pub normal: (f64, f64),
    pub length: f64,
}

/// The 1D channel grid. Each cell carries a rectangular cross-section and is
/// split into two equal subcells (north and south of the centerline) for the
/// lateral-discharge scheme.
#[derive(Debug, Clone)]
pub struct ChannelGrid1D {
    pub x0: f64,
    pub x1: f64,
    pub y_south: f64,
    pub y_north: f64,
    pub n_cells: usize,
    pub dx: f64,
    pub sections: Vec<ChannelCrossSection>,
    /// Boundary tags for the west and east ends.
    pub ends: [BoundaryKind; 2],
}

impl ChannelGrid1D {
    pub fn center(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    pub fn centerline_y(&self) -> f64 {
        0.5 * (self.y_south + self.y_north)
    }

    /// Outward unit normal of a lateral side; `(0, -1)` south, `(0, 1)` north.
    pub fn side_normal(&self, _cell: usize, side: ChannelSide) -> (f64, f64) {
        side.normal()
    }

    /// Areas of the two subcells of cell `i`: an equal split along the
    /// centerline, `dx * B / 2` each.
    pub fn split_subcells(&self, i: usize) -> (f64, f64) {
        let half = 0.5 * self.dx * self.sections[i].width;
        (half, half)
    }

    /// Length of the internal west/east subcell edges (`B / 2`).
    pub fn subcell_x_edge(&self, i: usize) -> f64 {
        0.5 * self.sections[i].width
    }

    /// Length of the internal edge between the two subcells (`dx`).
    pub fn subcell_ns_edge(&self, _i: usize) -> f64 {
        self.dx
    }
}

/// One piece of a channel cell's lateral side: either the interface with a
/// 2D cell or a closed-wall segment (no floodplain on the far side).
#[derive(Debug, Clone, Copy)]
pub struct LateralEdge {
    pub cell2d: Option<usize>,
    pub length: f64,
}

/// Per-cell, per-side lateral interface pieces. For every cell and side the
/// piece lengths sum exactly to the cell length `dx` (wall segments fill the
/// uncovered reach), which the lateral scheme relies on.
#[derive(Debug, Clone, Default)]
pub struct EdgeAdjacency {
    pub north: Vec<Vec<LateralEdge>>,
    pub south: Vec<Vec<LateralEdge>>,
}

impl EdgeAdjacency {
    pub fn side(&self, i: usize, side: ChannelSide) -> &[LateralEdge] {
        match side {
            ChannelSide::North => &self.north[i],
            ChannelSide::South => &self.south[i],
        }
    }
}

/// How to mesh the channel region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMeshing {
    /// 1D grid with subcells (coupled modes).
    OneD,
    /// Ordinary 2D block with the given lateral cell count (full-2D mode).
    TwoD { ny: usize },
}

/// Channel description for mesh building.
pub struct ChannelSpec {
    pub x0: f64,
    pub x1: f64,
    pub y_south: f64,
    pub y_north: f64,
    pub n_cells: usize,
    pub meshing: ChannelMeshing,
    pub bed: Box<dyn Fn(f64) -> f64>,
    pub bank_south: Box<dyn Fn(f64) -> f64>,
    pub bank_north: Box<dyn Fn(f64) -> f64>,
    pub manning: f64,
    pub ends: [BoundaryKind; 2],
}

/// Floodplain block description.
pub struct PlainSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    pub bed: Box<dyn Fn(f64, f64) -> f64>,
    pub manning: f64,
    pub boundaries: [BoundaryKind; 4],
}

/// Full domain description consumed by [`build_mesh`].
pub struct DomainSpec {
    pub plains: Vec<PlainSpec>,
    pub channel: Option<ChannelSpec>,
}

/// The assembled mesh: grid blocks, flattened cells, the global edge list,
/// and (in coupled modes) the channel grid and its lateral adjacency.
#[derive(Debug, Clone)]
pub struct CoupledMesh {
    pub blocks: Vec<Grid2D>,
    pub block_offsets: Vec<usize>,
    pub cells: Vec<Cell2D>,
    pub edges: Vec<Edge2D>,
    pub channel: Option<ChannelGrid1D>,
    pub adjacency: Option<EdgeAdjacency>,
}

impl CoupledMesh {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Global cell id for a block-local (ix, iy).
    pub fn cell_id(&self, block: usize, ix: usize, iy: usize) -> usize {
        self.block_offsets[block] + iy * self.blocks[block].nx + ix
    }

    /// Locate the 2D cell containing a point, if any.
    pub fn locate_2d(&self, x: f64, y: f64) -> Option<usize> {
        for (b, g) in self.blocks.iter().enumerate() {
            if x >= g.origin.0 && x <= g.x1() && y >= g.origin.1 && y <= g.y1() {
                let ix = (((x - g.origin.0) / g.dx) as usize).min(g.nx - 1);
                let iy = (((y - g.origin.1) / g.dy) as usize).min(g.ny - 1);
                return Some(self.cell_id(b, ix, iy));
            }
        }
        None
    }

    /// Locate the channel cell containing x, if a 1D channel exists and the
    /// point lies inside the strip.
    pub fn locate_channel(&self, x: f64, y: f64) -> Option<usize> {
        let ch = self.channel.as_ref()?;
        if x < ch.x0 || x > ch.x1 || y < ch.y_south || y > ch.y_north {
            return None;
        }
        Some((((x - ch.x0) / ch.dx) as usize).min(ch.n_cells - 1))
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Overlap of [a0,a1] and [b0,b1]; `None` when shorter than `tol`.
fn overlap(a0: f64, a1: f64, b0: f64, b1: f64, tol: f64) -> Option<(f64, f64)> {
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    if hi - lo > tol {
        Some((lo, hi))
    } else {
        None
    }
}

/// Adjust `pieces` (by up to a few ulps on the largest entry) so that their
/// left-to-right floating-point sum equals `target` exactly.
fn fix_partition(pieces: &mut [f64], target: f64) -> Result<()> {
    if pieces.is_empty() {
        return Err(Error::MeshBuild("empty side partition".into()));
    }
    for _ in 0..16 {
        let sum: f64 = pieces.iter().sum();
        if sum == target {
            return Ok(());
        }
        let diff = target - sum;
        if diff.abs() > 1e-9 * target.abs().max(1.0) {
            return Err(Error::MeshBuild(format!(
                "side partition sums to {sum}, expected {target}"
            )));
        }
        let k = pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap();
        pieces[k] += diff;
    }
    Err(Error::MeshBuild("side partition failed to converge".into()))
}

/// Covered sub-intervals per side, per boundary-cell-along-side.
type SideCover = [Vec<Vec<(f64, f64)>>; 4];

struct Builder {
    blocks: Vec<Grid2D>,
    block_offsets: Vec<usize>,
    cells: Vec<Cell2D>,
    edges: Vec<Edge2D>,
    cover: Vec<SideCover>,
    tol: f64,
}

impl Builder {
    fn add_block(&mut self, g: Grid2D) {
        self.block_offsets.push(self.cells.len());
        let manning = g.manning;
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let center = (
                    g.origin.0 + (ix as f64 + 0.5) * g.dx,
                    g.origin.1 + (iy as f64 + 0.5) * g.dy,
                );
                self.cells.push(Cell2D {
                    center,
                    dx: g.dx,
                    dy: g.dy,
                    area: g.dx * g.dy,
                    bed: g.bed[iy * g.nx + ix],
                    manning,
                    block: self.blocks.len(),
                });
            }
        }
        self.cover.push([
            vec![Vec::new(); g.ny], // west: indexed by iy
            vec![Vec::new(); g.ny], // east
            vec![Vec::new(); g.nx], // south: indexed by ix
            vec![Vec::new(); g.nx], // north
        ]);
        self.blocks.push(g);
    }

    fn cell_id(&self, block: usize, ix: usize, iy: usize) -> usize {
        self.block_offsets[block] + iy * self.blocks[block].nx + ix
    }

    fn intra_block_edges(&mut self, b: usize) {
        let g = self.blocks[b].clone();
        for iy in 0..g.ny {
            for ix in 0..g.nx.saturating_sub(1) {
                self.edges.push(Edge2D {
                    a: self.cell_id(b, ix, iy),
                    b: Neighbor::Cell(self.cell_id(b, ix + 1, iy)),
                    normal: (1.0, 0.0),
                    length: g.dy,
                });
            }
        }
        for iy in 0..g.ny.saturating_sub(1) {
            for ix in 0..g.nx {
                self.edges.push(Edge2D {
                    a: self.cell_id(b, ix, iy),
                    b: Neighbor::Cell(self.cell_id(b, ix, iy + 1)),
                    normal: (0.0, 1.0),
                    length: g.dx,
                });
            }
        }
    }

    /// Boundary cells of one block side: (local index along the side,
    /// global cell id, interval along the seam axis).
    fn side_cells(&self, b: usize, side: BlockSide) -> Vec<(usize, usize, f64, f64)> {
        let g = &self.blocks[b];
        let mut v = Vec::new();
        match side {
            BlockSide::West | BlockSide::East => {
                let ix = if side == BlockSide::West { 0 } else { g.nx - 1 };
                for iy in 0..g.ny {
                    let lo = g.origin.1 + iy as f64 * g.dy;
                    v.push((iy, self.cell_id(b, ix, iy), lo, lo + g.dy));
                }
            }
            BlockSide::South | BlockSide::North => {
                let iy = if side == BlockSide::South { 0 } else { g.ny - 1 };
                for ix in 0..g.nx {
                    let lo = g.origin.0 + ix as f64 * g.dx;
                    v.push((ix, self.cell_id(b, ix, iy), lo, lo + g.dx));
                }
            }
        }
        v
    }

    fn side_line(&self, b: usize, side: BlockSide) -> f64 {
        let g = &self.blocks[b];
        match side {
            BlockSide::West => g.origin.0,
            BlockSide::East => g.x1(),
            BlockSide::South => g.origin.1,
            BlockSide::North => g.y1(),
        }
    }

    /// Glue two blocks along a seam: `sa` of block `pa` coincides with the
    /// opposite side of block `pb`. Creates one edge per cell-interval
    /// overlap and marks coverage on both sides.
    fn seam(&mut self, pa: usize, sa: BlockSide, pb: usize, sb: BlockSide, normal: (f64, f64)) {
        let ca = self.side_cells(pa, sa);
        let cb = self.side_cells(pb, sb);
        for &(la, ida, a0, a1) in &ca {
            for &(lb, idb, b0, b1) in &cb {
                if let Some((lo, hi)) = overlap(a0, a1, b0, b1, self.tol) {
                    self.edges.push(Edge2D {
                        a: ida,
                        b: Neighbor::Cell(idb),
                        normal,
                        length: hi - lo,
                    });
                    self.cover[pa][sa as usize][la].push((lo, hi));
                    self.cover[pb][sb as usize][lb].push((lo, hi));
                }
            }
        }
    }

    fn inter_block_edges(&mut self) {
        for pa in 0..self.blocks.len() {
            for pb in 0..self.blocks.len() {
                if pa == pb {
                    continue;
                }
                // pa's east touching pb's west.
                if close(self.side_line(pa, BlockSide::East), self.side_line(pb, BlockSide::West)) {
                    self.seam(pa, BlockSide::East, pb, BlockSide::West, (1.0, 0.0));
                }
                // pa's north touching pb's south.
                if close(self.side_line(pa, BlockSide::North), self.side_line(pb, BlockSide::South)) {
                    self.seam(pa, BlockSide::North, pb, BlockSide::South, (0.0, 1.0));
                }
            }
        }
    }

    /// Fill every uncovered boundary segment with a boundary-condition edge.
    fn boundary_edges(&mut self) {
        for b in 0..self.blocks.len() {
            for side in [BlockSide::West, BlockSide::East, BlockSide::South, BlockSide::North] {
                let kind = self.blocks[b].boundaries[side as usize];
                let normal = match side {
                    BlockSide::West => (-1.0, 0.0),
                    BlockSide::East => (1.0, 0.0),
                    BlockSide::South => (0.0, -1.0),
                    BlockSide::North => (0.0, 1.0),
                };
                for (local, id, lo, hi) in self.side_cells(b, side) {
                    let mut covered = self.cover[b][side as usize][local].clone();
                    covered.sort_by(|u, v| u.0.total_cmp(&v.0));
                    let mut cursor = lo;
                    for (c0, c1) in covered {
                        if c0 - cursor > self.tol {
                            self.edges.push(Edge2D {
                                a: id,
                                b: Neighbor::Boundary(kind),
                                normal,
                                length: c0 - cursor,
                            });
                        }
                        cursor = cursor.max(c1);
                    }
                    if hi - cursor > self.tol {
                        self.edges.push(Edge2D {
                            a: id,
                            b: Neighbor::Boundary(kind),
                            normal,
                            length: hi - cursor,
                        });
                    }
                }
            }
        }
    }
}

fn rects_overlap(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64), tol: f64) -> bool {
    let (ax0, ax1, ay0, ay1) = a;
    let (bx0, bx1, by0, by1) = b;
    ax1.min(bx1) - ax0.max(bx0) > tol && ay1.min(by1) - ay0.max(by0) > tol
}

/// Assemble the mesh for a domain: 2D blocks (plus the channel as a block in
/// full-2D mode), the global edge list, and in 1D-channel mode the channel
/// grid and lateral adjacency.
pub fn build_mesh(spec: DomainSpec) -> Result<CoupledMesh> {
    // Reject overlapping regions up front.
    let mut rects: Vec<(f64, f64, f64, f64)> = spec
        .plains
        .iter()
        .map(|p| (p.x0, p.x1, p.y0, p.y1))
        .collect();
    if let Some(ch) = &spec.channel {
        rects.push((ch.x0, ch.x1, ch.y_south, ch.y_north));
    }
    let min_dim = spec
        .plains
        .iter()
        .flat_map(|p| {
            [
                (p.x1 - p.x0) / p.nx as f64,
                (p.y1 - p.y0) / p.ny as f64,
            ]
        })
        .chain(spec.channel.iter().map(|c| (c.x1 - c.x0) / c.n_cells as f64))
        .fold(f64::INFINITY, f64::min);
    if !min_dim.is_finite() || min_dim <= 0.0 {
        return Err(Error::MeshBuild("domain has no cells".into()));
    }
    let tol = 1e-6 * min_dim;
    for i in 0..rects.len() {
        for j in (i + 1)..rects.len() {
            if rects_overlap(rects[i], rects[j], tol) {
                return Err(Error::MeshBuild(format!(
                    "regions {i} and {j} overlap; blocks and channel must tile the domain"
                )));
            }
        }
    }

    let mut bld = Builder {
        blocks: Vec::new(),
        block_offsets: Vec::new(),
        cells: Vec::new(),
        edges: Vec::new(),
        cover: Vec::new(),
        tol,
    };

    for p in &spec.plains {
        if p.nx == 0 || p.ny == 0 || p.x1 <= p.x0 || p.y1 <= p.y0 {
            return Err(Error::MeshBuild("plain block must have positive extent and cells".into()));
        }
        let dx = (p.x1 - p.x0) / p.nx as f64;
        let dy = (p.y1 - p.y0) / p.ny as f64;
        let mut bed = Vec::with_capacity(p.nx * p.ny);
        for iy in 0..p.ny {
            for ix in 0..p.nx {
                let x = p.x0 + (ix as f64 + 0.5) * dx;
                let y = p.y0 + (iy as f64 + 0.5) * dy;
                bed.push((p.bed)(x, y));
            }
        }
        bld.add_block(Grid2D {
            nx: p.nx,
            ny: p.ny,
            dx,
            dy,
            origin: (p.x0, p.y0),
            bed,
            manning: p.manning,
            boundaries: p.boundaries,
        });
    }

    let mut channel_1d: Option<ChannelGrid1D> = None;
    if let Some(ch) = &spec.channel {
        if ch.n_cells == 0 || ch.x1 <= ch.x0 || ch.y_north <= ch.y_south {
            return Err(Error::MeshBuild("channel must have positive extent and cells".into()));
        }
        match ch.meshing {
            ChannelMeshing::TwoD { ny } => {
                // Channel meshed as an ordinary block; the bed is laterally
                // constant at Z_b(x).
                let nx = ch.n_cells;
                let dx = (ch.x1 - ch.x0) / nx as f64;
                let dy = (ch.y_north - ch.y_south) / ny as f64;
                let mut bed = Vec::with_capacity(nx * ny);
                for _iy in 0..ny {
                    for ix in 0..nx {
                        bed.push((ch.bed)(ch.x0 + (ix as f64 + 0.5) * dx));
                    }
                }
                bld.add_block(Grid2D {
                    nx,
                    ny,
                    dx,
                    dy,
                    origin: (ch.x0, ch.y_south),
                    bed,
                    manning: ch.manning,
                    boundaries: [ch.ends[0], ch.ends[1], BoundaryKind::Wall, BoundaryKind::Wall],
                });
            }
            ChannelMeshing::OneD => {
                let dx = (ch.x1 - ch.x0) / ch.n_cells as f64;
                let width = ch.y_north - ch.y_south;
                let mut sections = Vec::with_capacity(ch.n_cells);
                for i in 0..ch.n_cells {
                    let x = ch.x0 + (i as f64 + 0.5) * dx;
                    sections.push(ChannelCrossSection::new(
                        (ch.bed)(x),
                        width,
                        (ch.bank_south)(x),
                        (ch.bank_north)(x),
                        ch.manning,
                    )?);
                }
                channel_1d = Some(ChannelGrid1D {
                    x0: ch.x0,
                    x1: ch.x1,
                    y_south: ch.y_south,
                    y_north: ch.y_north,
                    n_cells: ch.n_cells,
                    dx,
                    sections,
                    ends: ch.ends,
                });
            }
        }
    }

    for b in 0..bld.blocks.len() {
        bld.intra_block_edges(b);
    }
    bld.inter_block_edges();

    // Lateral adjacency between the 1D channel and block boundary cells.
    let mut adjacency = None;
    if let Some(ch) = &channel_1d {
        let mut adj = EdgeAdjacency {
            north: vec![Vec::new(); ch.n_cells],
            south: vec![Vec::new(); ch.n_cells],
        };
        for side in [ChannelSide::North, ChannelSide::South] {
            // Facing block side and seam line.
            let (line, block_side) = match side {
                ChannelSide::North => (ch.y_north, BlockSide::South),
                ChannelSide::South => (ch.y_south, BlockSide::North),
            };
            // Candidate 2D boundary cells along the seam, sorted by x.
            let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
            for b in 0..bld.blocks.len() {
                if !close(bld.side_line(b, block_side), line) {
                    continue;
                }
                for (local, id, lo, hi) in bld.side_cells(b, block_side) {
                    if let Some((o0, o1)) = overlap(lo, hi, ch.x0, ch.x1, bld.tol) {
                        candidates.push((id, o0, o1));
                        bld.cover[b][block_side as usize][local].push((o0, o1));
                    }
                }
            }
            candidates.sort_by(|u, v| u.1.total_cmp(&v.1));

            for i in 0..ch.n_cells {
                let cell_lo = ch.x0 + i as f64 * ch.dx;
                let cell_hi = cell_lo + ch.dx;
                let mut pieces: Vec<LateralEdge> = Vec::new();
                let mut cursor = cell_lo;
                for &(id, c0, c1) in &candidates {
                    if let Some((o0, o1)) = overlap(c0, c1, cell_lo, cell_hi, bld.tol) {
                        if o0 - cursor > bld.tol {
                            pieces.push(LateralEdge { cell2d: None, length: o0 - cursor });
                        }
                        if bld.cells[id].bed < ch.sections[i].bed_elevation - 1e-12 {
                            return Err(Error::MeshBuild(format!(
                                "floodplain cell bed {} below channel bed {} at x = {}; the \
                                 lateral interface requires banks at or above the channel bed",
                                bld.cells[id].bed,
                                ch.sections[i].bed_elevation,
                                ch.center(i)
                            )));
                        }
                        pieces.push(LateralEdge { cell2d: Some(id), length: o1 - o0 });
                        cursor = o1;
                    }
                }
                if cell_hi - cursor > bld.tol {
                    pieces.push(LateralEdge { cell2d: None, length: cell_hi - cursor });
                }
                if pieces.is_empty() {
                    pieces.push(LateralEdge { cell2d: None, length: ch.dx });
                }
                // The lateral scheme needs the side pieces to sum to the cell
                // length exactly so the subcell pressure terms close.
                let mut lens: Vec<f64> = pieces.iter().map(|p| p.length).collect();
                fix_partition(&mut lens, ch.dx)?;
                for (p, l) in pieces.iter_mut().zip(lens) {
                    p.length = l;
                }
                match side {
                    ChannelSide::North => adj.north[i] = pieces,
                    ChannelSide::South => adj.south[i] = pieces,
                }
            }
        }
        adjacency = Some(adj);
    }

    bld.boundary_edges();

    let mesh = CoupledMesh {
        blocks: bld.blocks,
        block_offsets: bld.block_offsets,
        cells: bld.cells,
        edges: bld.edges,
        channel: channel_1d,
        adjacency,
    };
    validate(&mesh)?;
    Ok(mesh)
}

/// Sanity checks: every cell's edges close its perimeter and the adjacency
/// partition is exact.
fn validate(mesh: &CoupledMesh) -> Result<()> {
    let n = mesh.n_cells();
    let mut closure = vec![(0.0f64, 0.0f64); n];
    let mut perimeter = vec![0.0f64; n];
    for e in &mesh.edges {
        closure[e.a].0 += e.normal.0 * e.length;
        closure[e.a].1 += e.normal.1 * e.length;
        perimeter[e.a] += e.length;
        if let Neighbor::Cell(b) = e.b {
            closure[b].0 -= e.normal.0 * e.length;
            closure[b].1 -= e.normal.1 * e.length;
            perimeter[b] += e.length;
        }
    }
    if let (Some(ch), Some(adj)) = (&mesh.channel, &mesh.adjacency) {
        for i in 0..ch.n_cells {
            for side in [ChannelSide::North, ChannelSide::South] {
                let nrm = side.normal();
                let mut total = 0.0;
                for p in adj.side(i, side) {
                    total += p.length;
                    if let Some(j) = p.cell2d {
                        closure[j].0 -= nrm.0 * p.length;
                        closure[j].1 -= nrm.1 * p.length;
                        perimeter[j] += p.length;
                    }
                }
                if total != ch.dx {
                    return Err(Error::MeshBuild(format!(
                        "lateral side partition of channel cell {i} sums to {total}, expected {}",
                        ch.dx
                    )));
                }
            }
        }
    }
    for (j, c) in mesh.cells.iter().enumerate() {
        let expected = 2.0 * (c.dx + c.dy);
        if (perimeter[j] - expected).abs() > 1e-9 * expected {
            return Err(Error::MeshBuild(format!(
                "cell {j} perimeter {} does not match {expected}; a seam is misaligned",
                perimeter[j]
            )));
        }
        let tol = 1e-9 * expected;
        if closure[j].0.abs() > tol || closure[j].1.abs() > tol {
            return Err(Error::MeshBuild(format!(
                "cell {j} edge normals do not close: {:?}",
                closure[j]
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(_x: f64, _y: f64) -> f64 {
        0.0
    }

    fn simple_spec(plain_nx: usize, plain_ny: usize) -> DomainSpec {
        DomainSpec {
            plains: vec![PlainSpec {
                x0: 0.0,
                x1: 10.0,
                y0: 0.0,
                y1: 3.0,
                nx: plain_nx,
                ny: plain_ny,
                bed: Box::new(flat),
                manning: 0.0,
                boundaries: [BoundaryKind::Wall; 4],
            }],
            channel: Some(ChannelSpec {
                x0: 0.0,
                x1: 10.0,
                y_south: 3.0,
                y_north: 4.0,
                n_cells: 10,
                meshing: ChannelMeshing::OneD,
                bed: Box::new(|_| 0.0),
                bank_south: Box::new(|_| 0.0),
                bank_north: Box::new(|_| 10.0),
                manning: 0.0,
                ends: [BoundaryKind::Wall, BoundaryKind::Wall],
            }),
        }
    }

    #[test]
    fn matched_resolution_adjacency() {
        let mesh = build_mesh(simple_spec(10, 3)).unwrap();
        let ch = mesh.channel.as_ref().unwrap();
        let adj = mesh.adjacency.as_ref().unwrap();
        for i in 0..10 {
            let south = &adj.south[i];
            assert_eq!(south.len(), 1);
            assert!(south[0].cell2d.is_some());
            assert_eq!(south[0].length, 1.0);
            // North side has no floodplain: single wall piece.
            assert_eq!(adj.north[i].len(), 1);
            assert!(adj.north[i][0].cell2d.is_none());
            assert_eq!(ch.side_normal(i, ChannelSide::South), (0.0, -1.0));
            assert_eq!(ch.side_normal(i, ChannelSide::North), (0.0, 1.0));
        }
    }

    #[test]
    fn two_to_one_nesting() {
        let mesh = build_mesh(simple_spec(20, 3)).unwrap();
        let adj = mesh.adjacency.as_ref().unwrap();
        for i in 0..10 {
            let south = &adj.south[i];
            assert_eq!(south.len(), 2);
            for p in south {
                assert!(p.cell2d.is_some());
                assert!((p.length - 0.5).abs() < 1e-12);
            }
            let total: f64 = south.iter().map(|p| p.length).sum();
            assert_eq!(total, 1.0);
        }
    }

    #[test]
    fn subcell_split_is_even() {
        let mesh = build_mesh(simple_spec(10, 3)).unwrap();
        let ch = mesh.channel.as_ref().unwrap();
        let (n, s) = ch.split_subcells(0);
        assert_eq!(n, s);
        assert!((n + s - ch.dx * ch.sections[0].width).abs() < 1e-15);
        // dx = 0.1, B = 0.5: quarter of the cell area each.
        let half: f64 = 0.5 * 0.1 * 0.5;
        assert!((half - 0.025).abs() < 1e-18);
    }

    #[test]
    fn degenerate_width_is_rejected() {
        let mut spec = simple_spec(10, 3);
        spec.channel.as_mut().unwrap().y_north = 3.0; // zero width
        assert!(build_mesh(spec).is_err());
    }

    #[test]
    fn overlapping_blocks_are_rejected() {
        let mut spec = simple_spec(10, 3);
        spec.plains.push(PlainSpec {
            x0: 5.0,
            x1: 12.0,
            y0: 1.0,
            y1: 2.0,
            nx: 7,
            ny: 1,
            bed: Box::new(flat),
            manning: 0.0,
            boundaries: [BoundaryKind::Wall; 4],
        });
        assert!(build_mesh(spec).is_err());
    }

    #[test]
    fn partial_reach_adjacency() {
        // Floodplain only along x in [6, 10]: upstream cells see walls only.
        let mut spec = simple_spec(10, 3);
        spec.plains[0].x0 = 6.0;
        spec.plains[0].nx = 4;
        let mesh = build_mesh(spec).unwrap();
        let adj = mesh.adjacency.as_ref().unwrap();
        for i in 0..6 {
            assert!(adj.south[i].iter().all(|p| p.cell2d.is_none()));
        }
        for i in 6..10 {
            let total: f64 = adj.south[i].iter().map(|p| p.length).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(adj.south[i].iter().any(|p| p.cell2d.is_some()));
        }
    }

    #[test]
    fn adjacency_pairs_are_geometrically_consistent() {
        // Every (1D cell, 2D cell) pair must be mutual: the 2D cell sits
        // directly across the side line with an overlapping x-interval.
        let mesh = build_mesh(simple_spec(20, 3)).unwrap();
        let ch = mesh.channel.as_ref().unwrap();
        let adj = mesh.adjacency.as_ref().unwrap();
        for i in 0..ch.n_cells {
            let (lo, hi) = (ch.x0 + i as f64 * ch.dx, ch.x0 + (i + 1) as f64 * ch.dx);
            for p in adj.side(i, ChannelSide::South) {
                if let Some(j) = p.cell2d {
                    let c = &mesh.cells[j];
                    assert!((c.center.1 + 0.5 * c.dy - ch.y_south).abs() < 1e-12);
                    let (cl, cr) = (c.center.0 - 0.5 * c.dx, c.center.0 + 0.5 * c.dx);
                    assert!(cr > lo && cl < hi, "cell {j} does not overlap 1D cell {i}");
                }
            }
        }
    }

    #[test]
    fn non_conforming_partition_is_exact() {
        // 7 channel cells against 10 floodplain cells: staggered cuts.
        let mut spec = simple_spec(10, 3);
        spec.channel.as_mut().unwrap().n_cells = 7;
        let mesh = build_mesh(spec).unwrap();
        let ch = mesh.channel.as_ref().unwrap();
        let adj = mesh.adjacency.as_ref().unwrap();
        for i in 0..7 {
            let total: f64 = adj.south[i].iter().map(|p| p.length).sum();
            assert_eq!(total, ch.dx, "partition of cell {i} not exact");
        }
    }

    #[test]
    fn non_conforming_block_seam_is_fully_covered() {
        // Two blocks sharing a line with staggered resolutions (7 against 10
        // cells over the same extent): every overlap becomes an edge and the
        // perimeter/closure validation must hold.
        let mesh = build_mesh(DomainSpec {
            plains: vec![
                PlainSpec {
                    x0: 0.0,
                    x1: 2.0,
                    y0: 0.0,
                    y1: 1.0,
                    nx: 7,
                    ny: 2,
                    bed: Box::new(flat),
                    manning: 0.0,
                    boundaries: [BoundaryKind::Wall; 4],
                },
                PlainSpec {
                    x0: 0.0,
                    x1: 2.0,
                    y0: 1.0,
                    y1: 2.0,
                    nx: 10,
                    ny: 2,
                    bed: Box::new(flat),
                    manning: 0.0,
                    boundaries: [BoundaryKind::Wall; 4],
                },
            ],
            channel: None,
        })
        .unwrap();
        let seam: Vec<&Edge2D> = mesh
            .edges
            .iter()
            .filter(|e| {
                matches!(e.b, Neighbor::Cell(j) if mesh.cells[e.a].block != mesh.cells[j].block)
            })
            .collect();
        // 7-cell and 10-cell partitions of [0, 2] interleave into 16 pieces.
        assert_eq!(seam.len(), 16);
        let total: f64 = seam.iter().map(|e| e.length).sum();
        assert!((total - 2.0).abs() < 1e-12);
    }

    #[test]
    fn full2d_channel_block_is_glued() {
        let mut spec = simple_spec(10, 3);
        spec.channel.as_mut().unwrap().meshing = ChannelMeshing::TwoD { ny: 2 };
        let mesh = build_mesh(spec).unwrap();
        assert!(mesh.channel.is_none());
        assert_eq!(mesh.blocks.len(), 2);
        assert_eq!(mesh.n_cells(), 30 + 20);
        // Seam edges between the two blocks exist.
        let seam_edges = mesh
            .edges
            .iter()
            .filter(|e| {
                matches!(e.b, Neighbor::Cell(j) if mesh.cells[e.a].block != mesh.cells[j].block)
            })
            .count();
        assert_eq!(seam_edges, 10);
    }
}
