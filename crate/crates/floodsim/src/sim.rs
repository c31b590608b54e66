//! Time-integration driver: CFL step selection, boundary evaluation, and
//! the per-step sequence of the coupled method.
//!
//! One step in a coupled mode runs, all from time-level-n data:
//! interface fluxes -> 2D update (interface fluxes included) -> 1D update ->
//! coupling application -> lateral-discharge update. Full-2D mode is the 2D
//! update alone on the glued grid.

use std::time::Instant;

use crate::coupling;
use crate::geometry::SectionState;
use crate::mesh::CoupledMesh;
use crate::solver2d::State2D;
use crate::{cases, lateral, solver1d, solver2d};
use crate::{Error, Result, DRY_DEPTH, GRAVITY};

/// Run mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Whole domain as one 2D simulation (reference).
    Full2d,
    /// Horizontal coupling with lateral-discharge recovery.
    Hcm,
    /// Flux-based baseline: coupling fluxes with zero lateral discharge.
    Fbm,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Full2d => "full2d",
            Mode::Hcm => "hcm",
            Mode::Fbm => "fbm",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full2d" => Ok(Mode::Full2d),
            "hcm" => Ok(Mode::Hcm),
            "fbm" => Ok(Mode::Fbm),
            other => Err(format!("unknown mode '{other}' (expected full2d, hcm or fbm)")),
        }
    }
}

/// Prescribed-depth boundary signal: a half-period sine pulse of amplitude
/// `2 r` on top of the base depth, held constant after `t = 4 a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflowSpec {
    /// Base depth, m.
    pub eta0: f64,
    /// Pulse half-amplitude `r`, m.
    pub amplitude: f64,
    /// Ramp time scale `a`, s.
    pub ramp: f64,
}

impl InflowSpec {
    /// Boundary depth `h_b(t)`.
    pub fn depth(&self, t: f64) -> f64 {
        let a = self.ramp;
        let r = self.amplitude;
        if r == 0.0 {
            return self.eta0; // constant signal; also keeps ramp = 0 well defined
        }
        let at = t.min(4.0 * a);
        self.eta0 + r + r * ((at - a) * std::f64::consts::PI / (2.0 * a)).sin()
    }
}

/// A named observation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

/// Full simulation configuration. Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub mode: Mode,
    pub end_time: f64,
    pub cfl: f64,
    /// Probe sampling cadence; steps are clamped to land on ticks.
    pub output_dt: f64,
    /// Time step used when the whole domain is dry.
    pub fallback_dt: f64,
    pub case_id: u32,
    /// Grid-resolution scale factor (1 = published grids); extents are
    /// never scaled.
    pub scale: f64,
    pub manning_channel: f64,
    pub manning_floodplain: f64,
    pub channel_left: crate::mesh::BoundaryKind,
    pub channel_right: crate::mesh::BoundaryKind,
    /// Floodplain block sides opened as exits.
    pub floodplain_exits: Vec<crate::mesh::BlockSide>,
    pub inflow: InflowSpec,
    /// Replace the case's initial condition by still water at this surface
    /// elevation.
    pub initial_still_eta: Option<f64>,
    /// Replace the case's initial channel depth by a constant.
    pub initial_channel_depth: Option<f64>,
    pub probes: Vec<Probe>,
}

/// One probe reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSample {
    pub eta: f64,
    pub h: f64,
    pub u: f64,
    pub v: f64,
}

/// All probe readings at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub time: f64,
    pub samples: Vec<ProbeSample>,
}

/// Complete simulation state.
#[derive(Debug, Clone, Default)]
pub struct Fields {
    pub cells2d: Vec<State2D>,
    pub channel: Vec<SectionState>,
    pub lateral_n: Vec<f64>,
    pub lateral_s: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum ProbeTarget {
    Cell(usize),
    Channel { cell: usize, north: bool },
}

/// Per-step report.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub dt: f64,
    /// Largest coupling-term magnitudes this step (area, discharge).
    pub max_phi: (f64, f64),
    pub entropy_activations: usize,
    pub clips: u64,
}

/// A running simulation.
#[derive(Debug, Clone)]
pub struct Sim {
    pub cfg: SimConfig,
    pub mesh: CoupledMesh,
    pub fields: Fields,
    pub t: f64,
    pub steps: u64,
    /// Lateral-discharge update switch; disabling it in HCM mode reproduces
    /// the FBM exactly (used by the verification suite).
    pub lateral_enabled: bool,
    pub records: Vec<ProbeRecord>,
    /// Volume removed by the coupling positivity clip, m^3.
    pub clipped_volume: f64,
    probe_targets: Vec<ProbeTarget>,
    next_tick: u64,
}

impl SimConfig {
    /// Reject configurations that cannot run.
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Geometry(format!("cfl must be in (0, 1], got {}", self.cfl)));
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(Error::Geometry(format!("scale must be in (0, 1], got {}", self.scale)));
        }
        if self.end_time < 0.0 || self.end_time.is_nan() {
            return Err(Error::Geometry(format!("end_time must be >= 0, got {}", self.end_time)));
        }
        if self.inflow.amplitude != 0.0 && (self.inflow.ramp <= 0.0 || self.inflow.ramp.is_nan()) {
            return Err(Error::Geometry(format!(
                "inflow ramp must be positive when the amplitude is nonzero, got {}",
                self.inflow.ramp
            )));
        }
        if self.fallback_dt <= 0.0 || self.fallback_dt.is_nan() {
            return Err(Error::Geometry(format!(
                "fallback_dt must be positive, got {}",
                self.fallback_dt
            )));
        }
        Ok(())
    }
}

impl Sim {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let (mesh, fields) = cases::setup(&cfg)?;
        let mut probe_targets = Vec::with_capacity(cfg.probes.len());
        for p in &cfg.probes {
            let target = if let Some(cell) = mesh.locate_channel(p.x, p.y) {
                let ch = mesh.channel.as_ref().unwrap();
                ProbeTarget::Channel { cell, north: p.y > ch.centerline_y() }
            } else if let Some(j) = mesh.locate_2d(p.x, p.y) {
                ProbeTarget::Cell(j)
            } else {
                return Err(Error::MeshBuild(format!(
                    "probe {} at ({}, {}) lies outside the domain",
                    p.id, p.x, p.y
                )));
            };
            probe_targets.push(target);
        }
        let mut sim = Sim {
            cfg,
            mesh,
            fields,
            t: 0.0,
            steps: 0,
            lateral_enabled: true,
            records: Vec::new(),
            clipped_volume: 0.0,
            probe_targets,
            next_tick: 1,
        };
        sim.record();
        Ok(sim)
    }

    pub fn finished(&self) -> bool {
        self.t >= self.cfg.end_time - 1e-12
    }

    /// CFL time step from the current fields, clamped to the next output
    /// tick and the end time.
    pub fn planned_dt(&self) -> f64 {
        let mut dt = cfl_dt(&self.mesh, &self.fields, self.cfg.cfl, self.cfg.fallback_dt);
        dt = dt.min(self.cfg.end_time - self.t);
        if self.cfg.output_dt > 0.0 {
            let gap = self.next_tick as f64 * self.cfg.output_dt - self.t;
            if gap > 1e-12 {
                dt = dt.min(gap);
            }
        }
        dt
    }

    /// Advance one step of the given size.
    pub fn advance(&mut self, dt: f64) -> Result<StepInfo> {
        let hb = self.cfg.inflow.depth(self.t);
        let has_channel = self.mesh.channel.is_some();

        let iface = if has_channel {
            coupling::compute_interface_fluxes(
                &self.mesh,
                &self.fields.channel,
                &self.fields.lateral_n,
                &self.fields.lateral_s,
                &self.fields.cells2d,
            )
        } else {
            Vec::new()
        };
        let phis = coupling::assemble_all(&self.mesh, &iface);
        let mut max_phi = (0.0f64, 0.0f64);
        for p in &phis {
            max_phi.0 = max_phi.0.max(p.phi_a.abs());
            max_phi.1 = max_phi.1.max(p.phi_q.abs());
        }

        let new2d = solver2d::step_2d(&self.mesh, &self.fields.cells2d, dt, hb, &iface)?;

        let mut clips = 0u64;
        let mut entropy = 0usize;
        if let Some(ch) = &self.mesh.channel {
            let (starred, stats) = solver1d::step_1d(ch, &self.fields.channel, dt, hb)?;
            entropy = stats.entropy_activations;
            let mut next = Vec::with_capacity(starred.len());
            for (i, w) in starred.iter().enumerate() {
                let (mut nw, clip) = coupling::apply_coupling(*w, phis[i], dt);
                if let Some(lost) = clip {
                    clips += 1;
                    self.clipped_volume += lost * ch.dx;
                }
                if nw.area <= DRY_DEPTH * ch.sections[i].width {
                    nw.discharge = 0.0;
                }
                next.push(nw);
            }
            let (ln, ls) = if self.cfg.mode == Mode::Hcm && self.lateral_enabled {
                lateral::step_lateral(
                    &self.mesh,
                    &self.fields.channel,
                    &self.fields.lateral_n,
                    &self.fields.lateral_s,
                    &iface,
                    dt,
                    hb,
                )
            } else {
                (self.fields.lateral_n.clone(), self.fields.lateral_s.clone())
            };
            self.fields.channel = next;
            self.fields.lateral_n = ln;
            self.fields.lateral_s = ls;
        }
        self.fields.cells2d = new2d;

        self.t += dt;
        self.steps += 1;
        Ok(StepInfo { dt, max_phi, entropy_activations: entropy, clips })
    }

    /// One driver step: plan dt, advance, sample probes on output ticks.
    pub fn step(&mut self) -> Result<StepInfo> {
        let dt = self.planned_dt();
        if dt <= 0.0 {
            return Err(Error::CflViolation {
                location: "driver (non-positive time step)".into(),
                depth: dt,
            });
        }
        let info = self.advance(dt)?;
        if self.cfg.output_dt > 0.0 {
            let tick = self.next_tick as f64 * self.cfg.output_dt;
            if self.t >= tick - 1e-9 {
                self.record();
                self.next_tick += 1;
            }
        }
        if self.finished() && self.records.last().map(|r| r.time) != Some(self.t) {
            self.record();
        }
        Ok(info)
    }

    /// Append a probe record at the current time. Sampling reads state only.
    pub fn record(&mut self) {
        let mut samples = Vec::with_capacity(self.probe_targets.len());
        for target in &self.probe_targets {
            let s = match *target {
                ProbeTarget::Cell(j) => {
                    let w = &self.fields.cells2d[j];
                    let (u, v) = w.velocity();
                    ProbeSample { eta: w.eta(self.mesh.cells[j].bed), h: w.h, u, v }
                }
                ProbeTarget::Channel { cell, north } => {
                    let ch = self.mesh.channel.as_ref().unwrap();
                    let cs = &ch.sections[cell];
                    let w = &self.fields.channel[cell];
                    let h = w.depth(cs);
                    let u = w.velocity(cs);
                    let qy = if north { self.fields.lateral_n[cell] } else { self.fields.lateral_s[cell] };
                    let v = if h > DRY_DEPTH { qy / h } else { 0.0 };
                    ProbeSample { eta: w.surface_elevation(cs), h, u, v }
                }
            };
            samples.push(s);
        }
        self.records.push(ProbeRecord { time: self.t, samples });
    }

    pub fn total_volume(&self) -> f64 {
        total_volume(&self.mesh, &self.fields)
    }
}

/// CFL-limited time step over both grids: the smallest wet-cell crossing
/// time, scaled by the CFL number. Falls back to `fallback_dt` on an
/// all-dry domain.
pub fn cfl_dt(mesh: &CoupledMesh, fields: &Fields, cfl: f64, fallback_dt: f64) -> f64 {
    let mut limit = f64::INFINITY;
    for (w, c) in fields.cells2d.iter().zip(&mesh.cells) {
        if w.is_dry() {
            continue;
        }
        let (u, v) = w.velocity();
        let speed = (u * u + v * v).sqrt() + (GRAVITY * w.h).sqrt();
        limit = limit.min(c.dx.min(c.dy) / speed);
    }
    if let Some(ch) = &mesh.channel {
        for (i, w) in fields.channel.iter().enumerate() {
            let cs = &ch.sections[i];
            if w.area <= DRY_DEPTH * cs.width {
                continue;
            }
            let u = w.velocity(cs).abs();
            let c = cs.celerity(w.area);
            limit = limit.min(ch.dx / (u + c));
            // Subcell lateral stability guard; inactive on the published
            // cases where the 2D cells are smaller than the half width.
            let h = w.depth(cs);
            let vmax = fields.lateral_n[i].abs().max(fields.lateral_s[i].abs()) / h;
            limit = limit.min(0.5 * cs.width / (vmax + c));
        }
    }
    if limit.is_finite() {
        cfl * limit
    } else {
        fallback_dt
    }
}

/// Total water volume: 2D depths times cell areas plus channel wetted areas
/// times cell lengths.
pub fn total_volume(mesh: &CoupledMesh, fields: &Fields) -> f64 {
    let mut v: f64 = fields.cells2d.iter().zip(&mesh.cells).map(|(w, c)| w.h * c.area).sum();
    if let Some(ch) = &mesh.channel {
        v += fields.channel.iter().map(|w| w.area * ch.dx).sum::<f64>();
    }
    v
}

/// Completed run: the final simulation state plus timing.
#[derive(Debug)]
pub struct RunResult {
    pub sim: Sim,
    pub wall_seconds: f64,
}

impl RunResult {
    pub fn step_count(&self) -> u64 {
        self.sim.steps
    }
    pub fn records(&self) -> &[ProbeRecord] {
        &self.sim.records
    }
}

/// Integrate a configuration to its end time.
pub fn run(cfg: SimConfig) -> Result<RunResult> {
    let start = Instant::now();
    let mut sim = Sim::new(cfg)?;
    while !sim.finished() {
        sim.step()?;
    }
    Ok(RunResult { sim, wall_seconds: start.elapsed().as_secs_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{build_case, CaseSpec};

    #[test]
    fn boundary_depth_pulse() {
        let inflow = InflowSpec { eta0: 0.08, amplitude: 0.025, ramp: 10.0 };
        assert!((inflow.depth(10.0) - 0.105).abs() < 1e-15); // sin(0) = 0
        assert!((inflow.depth(20.0) - 0.13).abs() < 1e-15); // sin(pi/2) = 1
        assert!((inflow.depth(0.0) - 0.08).abs() < 1e-12); // sin(-pi/2) = -1
        // Held constant after 4a.
        assert_eq!(inflow.depth(41.0), inflow.depth(40.0));
        assert_eq!(inflow.depth(500.0), inflow.depth(40.0));
    }

    #[test]
    fn constant_inflow_when_amplitude_is_zero() {
        let inflow = InflowSpec { eta0: 0.08, amplitude: 0.0, ramp: 10.0 };
        for t in [0.0, 5.0, 17.0, 39.0, 80.0] {
            assert_eq!(inflow.depth(t), 0.08);
        }
        // A zero ramp is inert when the amplitude is zero.
        let degenerate = InflowSpec { eta0: 0.08, amplitude: 0.0, ramp: 0.0 };
        assert_eq!(degenerate.depth(3.0), 0.08);
    }

    #[test]
    fn cfl_dt_single_cell_example() {
        // One wet 2D cell, H = 1, u = v = 0, dx = dy = 0.1, CFL = 0.45.
        let mesh = crate::mesh::build_mesh(crate::mesh::DomainSpec {
            plains: vec![crate::mesh::PlainSpec {
                x0: 0.0,
                x1: 0.1,
                y0: 0.0,
                y1: 0.1,
                nx: 1,
                ny: 1,
                bed: Box::new(|_, _| 0.0),
                manning: 0.0,
                boundaries: [crate::mesh::BoundaryKind::Wall; 4],
            }],
            channel: None,
        })
        .unwrap();
        let fields = Fields {
            cells2d: vec![State2D::new(1.0, 0.0, 0.0)],
            ..Default::default()
        };
        let dt = cfl_dt(&mesh, &fields, 0.45, 1e-3);
        assert!((dt - 0.45 * 0.1 / GRAVITY.sqrt()).abs() < 1e-15);
        assert!((dt - 0.014367).abs() < 1e-6);
        // Doubling the CFL number doubles dt.
        assert_eq!(cfl_dt(&mesh, &fields, 0.9, 1e-3), 2.0 * dt);
        // All-dry domain: fallback.
        let dry = Fields { cells2d: vec![State2D::ZERO], ..Default::default() };
        assert_eq!(cfl_dt(&mesh, &dry, 0.45, 1e-3), 1e-3);
    }

    #[test]
    fn stricter_channel_cell_governs_dt() {
        // Fine, deep channel next to a coarse, shallow plain: the channel's
        // crossing time must set dt.
        use crate::mesh::{build_mesh, BoundaryKind, ChannelMeshing, ChannelSpec, DomainSpec, PlainSpec};
        let mesh = build_mesh(DomainSpec {
            plains: vec![PlainSpec {
                x0: 0.0,
                x1: 10.0,
                y0: 0.0,
                y1: 2.0,
                nx: 2,
                ny: 2,
                bed: Box::new(|_, _| 0.0),
                manning: 0.0,
                boundaries: [BoundaryKind::Wall; 4],
            }],
            channel: Some(ChannelSpec {
                x0: 0.0,
                x1: 10.0,
                y_south: 2.0,
                y_north: 3.0,
                n_cells: 100,
                meshing: ChannelMeshing::OneD,
                bed: Box::new(|_| 0.0),
                bank_south: Box::new(|_| 5.0),
                bank_north: Box::new(|_| 5.0),
                manning: 0.0,
                ends: [BoundaryKind::Wall, BoundaryKind::Wall],
            }),
        })
        .unwrap();
        let fields = Fields {
            cells2d: vec![State2D::new(0.1, 0.0, 0.0); 4],
            channel: vec![crate::geometry::SectionState::new(1.0, 0.0); 100],
            lateral_n: vec![0.0; 100],
            lateral_s: vec![0.0; 100],
        };
        // dt candidates: 2D is 1.0 / sqrt(0.1 g), 1D is 0.1 / sqrt(g).
        let expect_1d = 0.1 / GRAVITY.sqrt();
        let expect_2d = 1.0 / (GRAVITY * 0.1).sqrt();
        assert!(expect_1d < expect_2d);
        let dt = cfl_dt(&mesh, &fields, 0.45, 1e-3);
        assert!((dt - 0.45 * expect_1d).abs() < 1e-15);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = build_case(&CaseSpec { case_id: 3, mode: Mode::Hcm, scale: 0.05 }).unwrap();
        for breakage in [
            |c: &mut SimConfig| c.cfl = 0.0,
            |c: &mut SimConfig| c.cfl = 1.5,
            |c: &mut SimConfig| c.scale = 0.0,
            |c: &mut SimConfig| c.end_time = -1.0,
            |c: &mut SimConfig| c.inflow.ramp = 0.0,
            |c: &mut SimConfig| c.fallback_dt = 0.0,
        ] {
            let mut cfg = base.clone();
            breakage(&mut cfg);
            assert!(Sim::new(cfg).is_err());
        }
        assert!(base.validate().is_ok());
    }

    #[test]
    fn zero_end_time_takes_no_steps() {
        let mut cfg = build_case(&CaseSpec { case_id: 3, mode: Mode::Hcm, scale: 0.05 }).unwrap();
        cfg.end_time = 0.0;
        let result = run(cfg).unwrap();
        assert_eq!(result.step_count(), 0);
        assert_eq!(result.records().len(), 1);
        assert_eq!(result.records()[0].time, 0.0);
    }

    #[test]
    fn probe_times_strictly_increase() {
        let mut cfg = build_case(&CaseSpec { case_id: 3, mode: Mode::Hcm, scale: 0.05 }).unwrap();
        cfg.end_time = 1.0;
        cfg.output_dt = 0.1;
        let result = run(cfg).unwrap();
        let times: Vec<f64> = result.records().iter().map(|r| r.time).collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]), "{times:?}");
        assert!(times.len() >= 10);
        // Ticks land exactly.
        assert!((times[1] - 0.1).abs() < 1e-12, "{}", times[1]);
    }

    #[test]
    fn lake_at_rest_is_preserved_in_every_mode() {
        for mode in [Mode::Full2d, Mode::Hcm, Mode::Fbm] {
            let mut cfg = build_case(&CaseSpec { case_id: 2, mode, scale: 0.1 }).unwrap();
            cfg.initial_still_eta = Some(1.6);
            cfg.end_time = 0.5;
            let result = run(cfg).unwrap();
            let sim = &result.sim;
            for (w, c) in sim.fields.cells2d.iter().zip(&sim.mesh.cells) {
                assert!((w.eta(c.bed) - 1.6).abs() < 1e-12, "mode {mode:?}");
                assert!(w.qx.abs() < 1e-12 && w.qy.abs() < 1e-12);
            }
            if let Some(ch) = &sim.mesh.channel {
                for (w, cs) in sim.fields.channel.iter().zip(&ch.sections) {
                    assert!((w.surface_elevation(cs) - 1.6).abs() < 1e-12);
                    assert!(w.discharge.abs() < 1e-12);
                }
            }
        }
    }
}
