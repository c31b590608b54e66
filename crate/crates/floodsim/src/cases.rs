//! Built-in test cases: geometry, grids, initial conditions, boundary tags
//! and probe points for the three published configurations, with a
//! resolution scale factor for desk-size runs.
//!
//! - Case 1: dam-break flow in a 19.3 m x 0.5 m flat channel spilling into a
//!   flat floodplain along its downstream reach.
//! - Case 2: channel flow into a floodplain elevated 0.5 m, initially wet.
//! - Case 3: slow overtopping of a tanh-profiled channel wall onto an
//!   initially dry, laterally sloping floodplain, driven by a prescribed
//!   inflow depth pulse.

use crate::mesh::{
    build_mesh, BlockSide, BoundaryKind, ChannelMeshing, ChannelSpec, CoupledMesh, DomainSpec,
    PlainSpec,
};
use crate::sim::{Fields, InflowSpec, Mode, Probe, SimConfig};
use crate::solver2d::State2D;
use crate::{Error, Result};

/// Manning coefficient used by all published cases, s/m^(1/3).
pub const MANNING: f64 = 0.009;

/// Case selection for the CLI and the verification suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSpec {
    pub case_id: u32,
    pub mode: Mode,
    pub scale: f64,
}

/// Scale a published cell count, rounding up, at least one cell.
pub fn scaled(n: usize, scale: f64) -> usize {
    ((n as f64 * scale - 1e-9).ceil() as usize).max(1)
}

/// Channel wall elevation of case 3: two tanh ramps with a dip to about
/// 0.08 m between them.
pub fn case3_wall_elevation(x: f64) -> f64 {
    if x <= 10.5 {
        -0.06 * (3.0 * (x - 9.0)).tanh() + 0.14
    } else {
        0.06 * (3.0 * (x - 15.5)).tanh() + 0.14
    }
}

/// Case-3 floodplain bed: rises linearly from the channel wall elevation at
/// the channel edge (y = 3) to 0.2 m at y = 0.
pub fn case3_floodplain_bed(x: f64, y: f64) -> f64 {
    0.2 + (case3_wall_elevation(x) - 0.2) / 3.0 * y
}

/// Build the full configuration of a published case.
pub fn build_case(spec: &CaseSpec) -> Result<SimConfig> {
    if !(spec.scale > 0.0 && spec.scale <= 1.0) {
        return Err(Error::Geometry(format!("scale must be in (0, 1], got {}", spec.scale)));
    }
    let base = |probes: Vec<(f64, f64)>, end_time: f64| SimConfig {
        mode: spec.mode,
        end_time,
        cfl: 0.45,
        output_dt: 0.05,
        fallback_dt: 1e-3,
        case_id: spec.case_id,
        scale: spec.scale,
        manning_channel: MANNING,
        manning_floodplain: MANNING,
        channel_left: BoundaryKind::Wall,
        channel_right: BoundaryKind::Open,
        floodplain_exits: Vec::new(),
        inflow: InflowSpec { eta0: 0.0, amplitude: 0.0, ramp: 1.0 },
        initial_still_eta: None,
        initial_channel_depth: None,
        probes: probes
            .into_iter()
            .enumerate()
            .map(|(k, (x, y))| Probe { id: format!("P{}", k + 1), x, y })
            .collect(),
    };
    match spec.case_id {
        1 => {
            let mut cfg = base(
                vec![
                    (6.0, 2.05),
                    (10.0, 2.05),
                    (15.0, 2.2),
                    (13.5, 3.0),
                    (16.0, 5.0),
                    (18.0, 8.5),
                ],
                10.0,
            );
            cfg.floodplain_exits = vec![BlockSide::East];
            Ok(cfg)
        }
        2 => {
            let mut cfg = base(
                vec![
                    (4.0, 2.05),
                    (8.5, 2.05),
                    (11.0, 2.05),
                    (13.0, 2.05),
                    (15.5, 2.05),
                    (11.5, 1.5),
                    (13.25, 0.9),
                    (14.75, 1.5),
                    (15.5, 0.5),
                ],
                10.0,
            );
            cfg.floodplain_exits = vec![BlockSide::South];
            Ok(cfg)
        }
        3 => {
            let mut cfg = base(
                vec![
                    (2.5, 3.5),
                    (4.0, 3.8),
                    (7.0, 3.3),
                    (10.0, 3.4),
                    (11.0, 3.5),
                    (12.0, 3.3),
                    (14.0, 3.4),
                    (16.0, 3.5),
                    (17.3, 3.5),
                    (19.0, 3.5),
                    (12.0, 2.8),
                    (13.0, 2.8),
                    (12.0, 2.5),
                    (12.0, 2.0),
                    (13.0, 1.0),
                ],
                100.0,
            );
            cfg.channel_left = BoundaryKind::InflowDepth;
            cfg.channel_right = BoundaryKind::Wall;
            cfg.inflow = InflowSpec { eta0: 0.08, amplitude: 0.025, ramp: 10.0 };
            Ok(cfg)
        }
        other => Err(Error::UnknownCase(other)),
    }
}

struct CaseGeometry {
    domain: DomainSpec,
    /// Initial depth inside the channel strip, by x.
    channel_depth: Box<dyn Fn(f64) -> f64>,
    /// Initial depth on the floodplain, by position.
    plain_depth: Box<dyn Fn(f64, f64) -> f64>,
    /// Channel strip rectangle for classifying full-2D cells.
    strip: (f64, f64, f64, f64),
}

fn plain_boundaries(exits: &[BlockSide]) -> [BoundaryKind; 4] {
    let mut b = [BoundaryKind::Wall; 4];
    for side in exits {
        b[*side as usize] = BoundaryKind::Open;
    }
    b
}

fn case_geometry(cfg: &SimConfig) -> Result<CaseGeometry> {
    let s = cfg.scale;
    let meshing = match cfg.mode {
        Mode::Full2d => ChannelMeshing::TwoD { ny: scaled(channel_full2d_ny(cfg.case_id)?, s) },
        Mode::Hcm | Mode::Fbm => ChannelMeshing::OneD,
    };
    let ends = [cfg.channel_left, cfg.channel_right];
    match cfg.case_id {
        1 => Ok(CaseGeometry {
            domain: DomainSpec {
                plains: vec![PlainSpec {
                    x0: 12.5,
                    x1: 19.3,
                    y0: 2.3,
                    y1: 11.3,
                    nx: scaled(68, s),
                    ny: scaled(90, s),
                    bed: Box::new(|_, _| 0.0),
                    manning: cfg.manning_floodplain,
                    boundaries: plain_boundaries(&cfg.floodplain_exits),
                }],
                channel: Some(ChannelSpec {
                    x0: 0.0,
                    x1: 19.3,
                    y_south: 1.8,
                    y_north: 2.3,
                    n_cells: scaled(193, s),
                    meshing,
                    bed: Box::new(|_| 0.0),
                    // South side is the closed domain wall; the north bank is
                    // at bed level along the floodplain reach (free spill).
                    bank_south: Box::new(|_| 2.0),
                    bank_north: Box::new(|x| if x >= 12.5 { 0.0 } else { 2.0 }),
                    manning: cfg.manning_channel,
                    ends,
                }),
            },
            channel_depth: Box::new(|x| if x <= 6.10 { 0.504 } else { 0.003 }),
            plain_depth: Box::new(|_, _| 0.003),
            strip: (0.0, 19.3, 1.8, 2.3),
        }),
        2 => Ok(CaseGeometry {
            domain: DomainSpec {
                plains: vec![PlainSpec {
                    x0: 10.5,
                    x1: 16.0,
                    y0: 0.0,
                    y1: 1.8,
                    nx: scaled(55, s),
                    ny: scaled(90, s),
                    bed: Box::new(|_, _| 0.5),
                    manning: cfg.manning_floodplain,
                    boundaries: plain_boundaries(&cfg.floodplain_exits),
                }],
                channel: Some(ChannelSpec {
                    x0: 0.0,
                    x1: 19.3,
                    y_south: 1.8,
                    y_north: 2.3,
                    n_cells: scaled(193, s),
                    meshing,
                    bed: Box::new(|_| 0.0),
                    // The raised floodplain forms the south bank along the
                    // shared reach; elsewhere both sides are domain walls.
                    bank_south: Box::new(|x| if (10.5..=16.0).contains(&x) { 0.5 } else { 2.0 }),
                    bank_north: Box::new(|_| 2.0),
                    manning: cfg.manning_channel,
                    ends,
                }),
            },
            channel_depth: Box::new(|x| if x <= 8.5 { 1.5 } else { 0.7 }),
            plain_depth: Box::new(|_, _| 0.2),
            strip: (0.0, 19.3, 1.8, 2.3),
        }),
        3 => Ok(CaseGeometry {
            domain: DomainSpec {
                plains: vec![PlainSpec {
                    x0: 0.0,
                    x1: 20.0,
                    y0: 0.0,
                    y1: 3.0,
                    nx: scaled(600, s),
                    ny: scaled(90, s),
                    bed: Box::new(case3_floodplain_bed),
                    manning: cfg.manning_floodplain,
                    boundaries: plain_boundaries(&cfg.floodplain_exits),
                }],
                channel: Some(ChannelSpec {
                    x0: 0.0,
                    x1: 20.0,
                    y_south: 3.0,
                    y_north: 4.0,
                    n_cells: scaled(600, s),
                    meshing,
                    bed: Box::new(|_| 0.0),
                    bank_south: Box::new(case3_wall_elevation),
                    bank_north: Box::new(|_| 1.0),
                    manning: cfg.manning_channel,
                    ends,
                }),
            },
            channel_depth: Box::new(|_| 0.08),
            plain_depth: Box::new(|_, _| 0.0),
            strip: (0.0, 20.0, 3.0, 4.0),
        }),
        other => Err(Error::UnknownCase(other)),
    }
}

fn channel_full2d_ny(case_id: u32) -> Result<usize> {
    match case_id {
        1 | 2 => Ok(25),
        3 => Ok(30),
        other => Err(Error::UnknownCase(other)),
    }
}

/// Build the mesh and initial fields for a configuration.
pub fn setup(cfg: &SimConfig) -> Result<(CoupledMesh, Fields)> {
    let geo = case_geometry(cfg)?;
    let mesh = build_mesh(geo.domain)?;

    let in_strip = |x: f64, y: f64| {
        let (x0, x1, y0, y1) = geo.strip;
        x >= x0 && x <= x1 && y >= y0 && y <= y1
    };
    let channel_depth = |x: f64| cfg.initial_channel_depth.unwrap_or_else(|| (geo.channel_depth)(x));

    let cells2d: Vec<State2D> = mesh
        .cells
        .iter()
        .map(|c| {
            let h = match cfg.initial_still_eta {
                Some(eta) => (eta - c.bed).max(0.0),
                None => {
                    if in_strip(c.center.0, c.center.1) {
                        channel_depth(c.center.0)
                    } else {
                        (geo.plain_depth)(c.center.0, c.center.1)
                    }
                }
            };
            State2D::new(h, 0.0, 0.0)
        })
        .collect();

    let (channel, lateral_n, lateral_s) = match &mesh.channel {
        Some(ch) => {
            let states: Vec<crate::geometry::SectionState> = (0..ch.n_cells)
                .map(|i| {
                    let cs = &ch.sections[i];
                    let h = match cfg.initial_still_eta {
                        Some(eta) => (eta - cs.bed_elevation).max(0.0),
                        None => channel_depth(ch.center(i)),
                    };
                    crate::geometry::SectionState::new(cs.width * h, 0.0)
                })
                .collect();
            let (ln, ls) = crate::lateral::init_lateral(&vec![0.0; ch.n_cells]);
            (states, ln, ls)
        }
        None => (Vec::new(), Vec::new(), Vec::new()),
    };

    Ok((mesh, Fields { cells2d, channel, lateral_n, lateral_s }))
}
