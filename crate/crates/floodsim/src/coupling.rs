//! The discrete coupling between the 1D channel and the 2D floodplain.
//!
//! Per step and per lateral-interface edge, one HLL flux is computed from
//! the reconstructed channel state and the adjacent floodplain state. That
//! single flux is shared by all three consumers: the coupling source term
//! applied to the 1D state, the floodplain cell's finite-volume update, and
//! the lateral-discharge scheme. Sharing makes the mass exchanged by the two
//! sides identical by construction.

use crate::geometry::SectionState;
use crate::lateral::reconstruct_interface;
use crate::mesh::{ChannelSide, CoupledMesh};
use crate::solver2d::{hll_flux, pressure, rotate, EdgeFlux, State2D};


/// Coupling source for one channel cell: area and discharge equation terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CouplingTerm {
    /// Mass exchange `Phi^A`, m^2/s.
    pub phi_a: f64,
    /// Momentum exchange `Phi^Q`, m^3/s^2.
    pub phi_q: f64,
}

/// Flux data for one lateral-interface piece, computed once per step from
/// time-level-n states. `phi` is the HLL flux in the frame rotated onto the
/// side normal; wall pieces carry a zero flux and `h2 = 0`.
#[derive(Debug, Clone, Copy)]
pub struct EntryFlux {
    pub cell1d: usize,
    pub side: ChannelSide,
    pub cell2d: Option<usize>,
    pub length: f64,
    /// Rotated-frame HLL flux (mass, normal momentum, transverse momentum).
    pub phi: EdgeFlux,
    /// Reconstructed channel-side depth at this edge.
    pub h2: f64,
    /// `H* = max(h2, H_2d)` entering the pressure part of `Psi`.
    pub hstar: f64,
}

/// Compute the interface fluxes for every lateral edge of every channel
/// cell, from level-n states. In FBM mode pass all-zero lateral discharges.
pub fn compute_interface_fluxes(
    mesh: &CoupledMesh,
    channel: &[SectionState],
    lateral_n: &[f64],
    lateral_s: &[f64],
    states2d: &[State2D],
) -> Vec<EntryFlux> {
    let (ch, adj) = match (&mesh.channel, &mesh.adjacency) {
        (Some(c), Some(a)) => (c, a),
        _ => return Vec::new(),
    };
    let mut out = Vec::new();
    for i in 0..ch.n_cells {
        let cs = &ch.sections[i];
        let w = &channel[i];
        let h_bar = w.depth(cs);
        let u_bar = w.velocity(cs);
        let eta_bar = w.surface_elevation(cs);
        for side in [ChannelSide::South, ChannelSide::North] {
            let q_y = match side {
                ChannelSide::North => lateral_n[i],
                ChannelSide::South => lateral_s[i],
            };
            let side_state = State2D::new(h_bar, h_bar * u_bar, q_y);
            let nrm = side.normal();
            for piece in adj.side(i, side) {
                let entry = match piece.cell2d {
                    None => EntryFlux {
                        cell1d: i,
                        side,
                        cell2d: None,
                        length: piece.length,
                        phi: [0.0; 3],
                        h2: 0.0,
                        hstar: 0.0,
                    },
                    Some(j) => {
                        let wt = reconstruct_interface(side_state, eta_bar, mesh.cells[j].bed);
                        let pi = states2d[j];
                        let phi = hll_flux(rotate(wt, nrm), rotate(pi, nrm));
                        EntryFlux {
                            cell1d: i,
                            side,
                            cell2d: Some(j),
                            length: piece.length,
                            phi,
                            h2: wt.h,
                            hstar: wt.h.max(pi.h),
                        }
                    }
                };
                out.push(entry);
            }
        }
    }
    out
}

/// Interface fluxes of the flux-based baseline: the same computation with
/// the lateral discharges held at zero.
pub fn fbm_interface_fluxes(
    mesh: &CoupledMesh,
    channel: &[SectionState],
    states2d: &[State2D],
) -> Vec<EntryFlux> {
    let n = mesh.channel.as_ref().map_or(0, |c| c.n_cells);
    let zeros = vec![0.0; n];
    compute_interface_fluxes(mesh, channel, &zeros, &zeros, states2d)
}

/// Per-edge coupling contribution `Psi` from a rotated-frame flux.
///
/// `f1` is the mass flux; `f2` the x-momentum component of the unrotated
/// flux. The south side enters with `1/n_y`, the north side with the
/// opposite sign, and a pressure correction `(n_x/n_y) g H*^2 / 2` removes
/// the lateral hydrostatic thrust (zero for straight channels).
pub fn psi_from_flux(side: ChannelSide, phi: EdgeFlux, hstar: f64, ratio: f64) -> CouplingTerm {
    let n = side.normal();
    let f1 = phi[0];
    let f2 = n.0 * phi[1] - n.1 * phi[2];
    let corr = (n.0 / n.1) * pressure(hstar);
    match side {
        ChannelSide::South => {
            CouplingTerm { phi_a: ratio * (f1 / n.1), phi_q: ratio * (f2 / n.1 - corr) }
        }
        ChannelSide::North => {
            CouplingTerm { phi_a: ratio * (-f1 / n.1), phi_q: ratio * (-f2 / n.1 + corr) }
        }
    }
}

/// `Psi` for one lateral edge, from the reconstructed channel state and the
/// adjacent floodplain state directly.
pub fn edge_coupling(side: ChannelSide, wt: State2D, pi: State2D, ratio: f64) -> CouplingTerm {
    let nrm = side.normal();
    let phi = hll_flux(rotate(wt, nrm), rotate(pi, nrm));
    psi_from_flux(side, phi, wt.h.max(pi.h), ratio)
}

/// Assemble the coupling term of one channel cell from its edge fluxes,
/// weighted by edge length over total side length.
pub fn assemble_coupling<'a>(
    side_length: f64,
    entries: impl IntoIterator<Item = &'a EntryFlux>,
) -> CouplingTerm {
    let mut phi = CouplingTerm::default();
    for e in entries {
        let psi = psi_from_flux(e.side, e.phi, e.hstar, e.length / side_length);
        phi.phi_a += psi.phi_a;
        phi.phi_q += psi.phi_q;
    }
    phi
}

/// Coupling terms for every channel cell.
pub fn assemble_all(mesh: &CoupledMesh, iface: &[EntryFlux]) -> Vec<CouplingTerm> {
    let ch = match &mesh.channel {
        Some(c) => c,
        None => return Vec::new(),
    };
    let mut out = vec![CouplingTerm::default(); ch.n_cells];
    for e in iface {
        let psi = psi_from_flux(e.side, e.phi, e.hstar, e.length / ch.dx);
        out[e.cell1d].phi_a += psi.phi_a;
        out[e.cell1d].phi_q += psi.phi_q;
    }
    out
}

/// Apply the coupling term to the starred 1D state. Returns the updated
/// state and the volume per unit length lost to the positivity clip, if the
/// clip triggered.
pub fn apply_coupling(w_star: SectionState, phi: CouplingTerm, dt: f64) -> (SectionState, Option<f64>) {
    let a = w_star.area + dt * phi.phi_a;
    let q = w_star.discharge + dt * phi.phi_q;
    if a < 0.0 {
        (SectionState::new(0.0, 0.0), Some(-a))
    } else {
        (SectionState::new(a, q), None)
    }
}

/// The flux applied to the adjacent floodplain cell at a lateral-interface
/// edge, in physical coordinates and per unit edge length. It is the exact
/// negative of the channel-outward flux, so mass exchanged matches on both
/// sides.
pub fn interface_flux_2d_side(entry: &EntryFlux) -> EdgeFlux {
    let n = entry.side.normal();
    let m = (-n.0, -n.1);
    // Frame flip negates the mass component of the rotated flux.
    let phi_m = [-entry.phi[0], entry.phi[1], entry.phi[2]];
    [phi_m[0], m.0 * phi_m[1] - m.1 * phi_m[2], m.1 * phi_m[1] + m.0 * phi_m[2]]
}
