//! Uncoupled 1D channel step: quasi-linear Roe scheme with upwinded source
//! projection and an entropy fix.
//!
//! The Saint-Venant system in (A, Q) is advanced by splitting each interface
//! jump into the two Roe eigenvectors; bed slope, depth gradient and Manning
//! friction enter through the projected source strengths, which cancel the
//! convective strengths exactly for still water over an arbitrary bed.

use crate::geometry::{ChannelCrossSection, SectionState};
use crate::mesh::{BoundaryKind, ChannelGrid1D};
use crate::{Error, Result, DRY_DEPTH, GRAVITY, NEGATIVE_DEPTH_TOL};

/// Roe-averaged interface data between two channel cells.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoeInterfaceData {
    pub a_hat: f64,
    pub u_hat: f64,
    pub b_hat: f64,
    pub h_hat: f64,
    pub c_hat: f64,
    pub so_hat: f64,
    pub sf_hat: f64,
    /// Roe eigenvalues `u_hat -+ c_hat`.
    pub lambda: [f64; 2],
    /// Both cells dry: the interface carries no fluctuations.
    pub inert: bool,
}

fn is_dry(w: &SectionState, cs: &ChannelCrossSection) -> bool {
    w.area <= DRY_DEPTH * cs.width
}

/// Roe averages between `(wl, csl)` and `(wr, csr)`; `dx` is the distance
/// between the two cell centers (used for the discrete bed slope).
pub fn roe_averages(
    wl: &SectionState,
    csl: &ChannelCrossSection,
    wr: &SectionState,
    csr: &ChannelCrossSection,
    dx: f64,
) -> RoeInterfaceData {
    let dry_l = is_dry(wl, csl);
    let dry_r = is_dry(wr, csr);
    if dry_l && dry_r {
        return RoeInterfaceData { inert: true, ..Default::default() };
    }
    let ul = wl.velocity(csl);
    let ur = wr.velocity(csr);
    let sl = wl.area.max(0.0).sqrt();
    let sr = wr.area.max(0.0).sqrt();
    let a_hat = 0.5 * (wl.area + wr.area);
    let u_hat = if sl + sr > 0.0 { (sl * ul + sr * ur) / (sl + sr) } else { 0.0 };
    let b_hat = 0.5 * (csl.width + csr.width);
    let h_hat = a_hat / b_hat;
    let c_hat = (GRAVITY * h_hat).sqrt();
    // Bed slope is the negative of the discrete bed gradient; this sign is
    // what balances the depth-gradient term for still water.
    let so_hat = -(csr.bed_elevation - csl.bed_elevation) / dx;
    let n_hat = 0.5 * (csl.manning_n + csr.manning_n);
    let sf_hat = if n_hat == 0.0 || a_hat <= 0.0 {
        0.0
    } else {
        let p_hat = b_hat + 2.0 * a_hat / b_hat;
        let k = a_hat.powf(5.0 / 3.0) / (n_hat * p_hat.powf(2.0 / 3.0));
        let q_hat = a_hat * u_hat;
        q_hat * q_hat.abs() / (k * k)
    };
    RoeInterfaceData {
        a_hat,
        u_hat,
        b_hat,
        h_hat,
        c_hat,
        so_hat,
        sf_hat,
        lambda: [u_hat - c_hat, u_hat + c_hat],
        inert: false,
    }
}

/// Wave strengths: the decomposition of `(dA, dQ)` onto the Roe
/// eigenvectors `(1, lambda_m)`.
pub fn wave_strengths(data: &RoeInterfaceData, da: f64, dq: f64) -> [f64; 2] {
    if data.inert || data.c_hat <= 0.0 {
        return [0.0, 0.0];
    }
    let inv2c = 0.5 / data.c_hat;
    [(data.lambda[1] * da - dq) * inv2c, (-data.lambda[0] * da + dq) * inv2c]
}

/// Source strengths: the projection of the bed/depth/friction source onto
/// the eigenvectors. `dh` is the depth difference, `da` the area difference.
pub fn source_strengths(data: &RoeInterfaceData, dx: f64, dh: f64, da: f64) -> [f64; 2] {
    if data.inert || data.c_hat <= 0.0 {
        return [0.0, 0.0];
    }
    let b1 = -GRAVITY * data.a_hat / (2.0 * data.c_hat)
        * ((data.so_hat - data.sf_hat) * dx - dh + da / data.b_hat);
    [b1, -b1]
}

/// Transonic entropy viscosity: `(lambda_r - lambda_l) / 4` when the cell
/// eigenvalues straddle zero, else zero.
pub fn entropy_fix(lambda_l: f64, lambda_r: f64) -> f64 {
    if lambda_l < 0.0 && 0.0 < lambda_r {
        0.25 * (lambda_r - lambda_l)
    } else {
        0.0
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Per-step solver statistics.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats1D {
    /// Interfaces where the entropy fix was active this step.
    pub entropy_activations: usize,
}

fn ghost(
    end: BoundaryKind,
    w: &SectionState,
    cs: &ChannelCrossSection,
    inflow_depth: f64,
) -> SectionState {
    match end {
        BoundaryKind::Wall => SectionState::new(w.area, -w.discharge),
        BoundaryKind::Open => *w,
        BoundaryKind::InflowDepth => SectionState::new(cs.width * inflow_depth, w.discharge),
    }
}

/// One explicit update of the uncoupled channel model, producing the starred
/// state (coupling terms are applied separately).
pub fn step_1d(
    channel: &ChannelGrid1D,
    states: &[SectionState],
    dt: f64,
    inflow_depth: f64,
) -> Result<(Vec<SectionState>, StepStats1D)> {
    let n = channel.n_cells;
    debug_assert_eq!(states.len(), n);
    let mut acc = vec![[0.0f64; 2]; n];
    let mut stats = StepStats1D::default();

    // Interface loop over -1/2 .. n-1/2 with ghost cells at both ends.
    for k in 0..=n {
        let (wl, csl) = if k == 0 {
            (ghost(channel.ends[0], &states[0], &channel.sections[0], inflow_depth), channel.sections[0])
        } else {
            (states[k - 1], channel.sections[k - 1])
        };
        let (wr, csr) = if k == n {
            (
                ghost(channel.ends[1], &states[n - 1], &channel.sections[n - 1], inflow_depth),
                channel.sections[n - 1],
            )
        } else {
            (states[k], channel.sections[k])
        };

        let data = roe_averages(&wl, &csl, &wr, &csr, channel.dx);
        if data.inert {
            continue;
        }
        let da = wr.area - wl.area;
        let dq = wr.discharge - wl.discharge;
        let dh = wr.depth(&csr) - wl.depth(&csl);
        let alpha = wave_strengths(&data, da, dq);
        let beta = source_strengths(&data, channel.dx, dh, da);

        // Cell eigenvalues for the entropy fix.
        let cell_lambda = |w: &SectionState, cs: &ChannelCrossSection| {
            let u = w.velocity(cs);
            let c = cs.celerity(w.area);
            [u - c, u + c]
        };
        let ll = cell_lambda(&wl, &csl);
        let lr = cell_lambda(&wr, &csr);

        let mut fix_active = false;
        for m in 0..2 {
            let gamma = data.lambda[m] * alpha[m] - beta[m];
            let nu = entropy_fix(ll[m], lr[m]);
            if nu > 0.0 {
                fix_active = true;
            }
            let s = sgn(data.lambda[m]);
            let gamma_plus = 0.5 * (1.0 + s) * gamma + nu * alpha[m];
            let gamma_minus = 0.5 * (1.0 - s) * gamma - nu * alpha[m];
            let e = [1.0, data.lambda[m]];
            // Left-going part feeds the left cell, right-going the right cell.
            if k > 0 {
                acc[k - 1][0] += gamma_minus * e[0];
                acc[k - 1][1] += gamma_minus * e[1];
            }
            if k < n {
                acc[k][0] += gamma_plus * e[0];
                acc[k][1] += gamma_plus * e[1];
            }
        }
        if fix_active {
            stats.entropy_activations += 1;
        }
    }

    let r = dt / channel.dx;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut a = states[i].area - r * acc[i][0];
        let mut q = states[i].discharge - r * acc[i][1];
        if a < 0.0 {
            if a >= -NEGATIVE_DEPTH_TOL * channel.sections[i].width {
                a = 0.0;
                q = 0.0;
            } else {
                return Err(Error::CflViolation {
                    location: format!("channel cell {i} at x = {}", channel.center(i)),
                    depth: a / channel.sections[i].width,
                });
            }
        }
        if a <= DRY_DEPTH * channel.sections[i].width {
            q = 0.0;
        }
        out.push(SectionState::new(a, q));
    }
    Ok((out, stats))
}
