//! Channel lateral-discharge recovery.
//!
//! Each channel cell is split into a north and a south subcell, both viewed
//! as 2D cells carrying the state `(h, h u, q_y^side)`. The two lateral
//! discharges evolve through the third component of rotated HLL fluxes over
//! the internal subcell edges (flat bottom, full states) and over the
//! lateral-interface edges (hydrostatically reconstructed states shared with
//! the coupling term, plus the reconstruction pressure correction).

use crate::coupling::EntryFlux;
use crate::geometry::SectionState;
use crate::mesh::{BoundaryKind, ChannelSide, CoupledMesh};
use crate::solver2d::{hll_flux, pressure, rotate, State2D};
use crate::DRY_DEPTH;

/// Subcell averages of a channel cell: `(h, h u, q_y)` for both sides.
pub fn subcell_states(
    w: &SectionState,
    qy_north: f64,
    qy_south: f64,
    cs: &crate::geometry::ChannelCrossSection,
) -> (State2D, State2D) {
    if w.area <= DRY_DEPTH * cs.width {
        return (State2D::ZERO, State2D::ZERO);
    }
    let h = w.depth(cs);
    let hu = w.discharge / cs.width;
    (State2D::new(h, hu, qy_north), State2D::new(h, hu, qy_south))
}

/// Hydrostatic reconstruction of a subcell state at a lateral-interface
/// edge: depth is the channel surface elevation over the floodplain cell's
/// bed, clamped at zero; velocities are carried over.
pub fn reconstruct_interface(side_state: State2D, eta_bar: f64, z_2d: f64) -> State2D {
    let h2 = (eta_bar - z_2d).max(0.0);
    if side_state.h <= DRY_DEPTH {
        return State2D::new(h2, 0.0, 0.0);
    }
    let u = side_state.qx / side_state.h;
    let v = side_state.qy / side_state.h;
    State2D::new(h2, h2 * u, h2 * v)
}

/// Initial subcell lateral discharges: both sides start from the cell's
/// single initial lateral discharge.
pub fn init_lateral(qy0: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (qy0.to_vec(), qy0.to_vec())
}

fn ghost_subcell(end: BoundaryKind, w: State2D, inflow_depth: f64) -> State2D {
    match end {
        BoundaryKind::Wall => State2D::new(w.h, -w.qx, w.qy),
        BoundaryKind::Open => w,
        BoundaryKind::InflowDepth => State2D::new(inflow_depth, w.qx, w.qy),
    }
}

/// Advance the per-cell lateral discharges by one step from level-n data.
///
/// `iface` must be the interface fluxes computed for the same time level
/// (the third flux component and `h2` are reused here).
pub fn step_lateral(
    mesh: &CoupledMesh,
    channel: &[SectionState],
    lateral_n: &[f64],
    lateral_s: &[f64],
    iface: &[EntryFlux],
    dt: f64,
    inflow_depth: f64,
) -> (Vec<f64>, Vec<f64>) {
    let ch = mesh.channel.as_ref().expect("lateral step requires a 1D channel");
    let n = ch.n_cells;

    let mut wn = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = subcell_states(&channel[i], lateral_n[i], lateral_s[i], &ch.sections[i]);
        wn.push(a);
        ws.push(b);
    }

    // Accumulated edge terms per subcell (the square bracket of the scheme).
    let mut acc_n = vec![0.0f64; n];
    let mut acc_s = vec![0.0f64; n];

    // Internal x-direction edges, ghost subcells at both ends. The third
    // unrotated flux component at an east edge is +phi_3; the neighbour's
    // west edge sees -phi_3.
    for row in [true, false] {
        let states: &Vec<State2D> = if row { &wn } else { &ws };
        let acc: &mut Vec<f64> = if row { &mut acc_n } else { &mut acc_s };
        for k in 0..=n {
            let wl = if k == 0 { ghost_subcell(ch.ends[0], states[0], inflow_depth) } else { states[k - 1] };
            let wr = if k == n { ghost_subcell(ch.ends[1], states[n - 1], inflow_depth) } else { states[k] };
            let phi = hll_flux(wl, wr); // frame (1,0) needs no rotation
            let len = 0.5 * ch.sections[k.min(n - 1)].width;
            if k > 0 {
                acc[k - 1] += len * phi[2];
            }
            if k < n {
                acc[k] -= len * phi[2];
            }
        }
    }

    // Internal edge between the two subcells, in the south-pointing frame of
    // the north subcell. The n_y-weighted normal momentum flux lands with
    // opposite signs on the two subcells.
    let mut phi2_ns = vec![0.0f64; n];
    for i in 0..n {
        let nrm = (0.0, -1.0);
        let phi = hll_flux(rotate(wn[i], nrm), rotate(ws[i], nrm));
        phi2_ns[i] = phi[1];
        // x-direction transverse leakage (phi[2]) is zero for x-aligned
        // channels (n_x = 0) and is dropped here.
    }

    // Lateral-interface edges: shared fluxes plus the reconstruction
    // pressure correction, grouped so that the subcell pressure p(h) cancels
    // the internal-edge pressure bitwise (the side pieces sum exactly to dx).
    let mut ext_n = vec![0.0f64; n];
    let mut ext_s = vec![0.0f64; n];
    for e in iface {
        let d = e.phi[1] - pressure(e.h2);
        match e.side {
            ChannelSide::North => ext_n[e.cell1d] += e.length * d,
            ChannelSide::South => ext_s[e.cell1d] -= e.length * d,
        }
    }

    let mut out_n = Vec::with_capacity(n);
    let mut out_s = Vec::with_capacity(n);
    for i in 0..n {
        let h_bar = channel[i].depth(&ch.sections[i]);
        let p_bar = pressure(h_bar);
        // North subcell: e_NS contributes -phi2, the exterior contributes
        // +p(h) per unit length; both scale with dx.
        let bracket_n = acc_n[i] + ext_n[i] + ch.dx * (p_bar - phi2_ns[i]);
        let bracket_s = acc_s[i] + ext_s[i] - ch.dx * (p_bar - phi2_ns[i]);
        let (area_n, area_s) = ch.split_subcells(i);
        out_n.push(lateral_n[i] - dt / area_n * bracket_n);
        out_s.push(lateral_s[i] - dt / area_s * bracket_s);
    }
    (out_n, out_s)
}
