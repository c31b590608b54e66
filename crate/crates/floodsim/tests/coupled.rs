//! Cross-module behavior of the coupled system: exchange bookkeeping,
//! dry-floodplain inertness at small scale, driver-step composition,
//! determinism.

use floodsim::cases::{build_case, CaseSpec};
use floodsim::coupling::{self, apply_coupling};
use floodsim::mesh::{BlockSide, BoundaryKind};
use floodsim::sim::{run, Mode, Sim};
use floodsim::{lateral, solver1d, solver2d};

#[test]
fn closed_flooding_run_conserves_volume() {
    // Test-1 geometry with every boundary closed: active flooding through
    // the coupling must move volume between the grids without creating any.
    let mut cfg = build_case(&CaseSpec { case_id: 1, mode: Mode::Hcm, scale: 0.2 }).unwrap();
    cfg.channel_right = BoundaryKind::Wall;
    cfg.floodplain_exits = Vec::new();
    cfg.output_dt = 0.0;
    cfg.end_time = 1e9;
    let mut sim = Sim::new(cfg).unwrap();
    let v0 = sim.total_volume();
    let mut flooded = false;
    for _ in 0..400 {
        sim.step().unwrap();
        flooded |= sim.fields.cells2d.iter().any(|w| w.h > 0.01);
        let drift = (sim.total_volume() - v0).abs() / v0;
        assert!(drift <= 1e-12, "volume drift {drift:e} at t = {}", sim.t);
    }
    assert!(flooded, "the dam break never reached the floodplain");
    assert_eq!(sim.clipped_volume, 0.0);
}

#[test]
fn full2d_non_conforming_seam_conserves_volume() {
    // Desk-scale full-2D meshes the channel and floodplain with staggered
    // resolutions (0.199 m against 0.2 m cells); the seam edges must still
    // move volume conservatively while the dam break crosses them.
    let mut cfg = build_case(&CaseSpec { case_id: 1, mode: Mode::Full2d, scale: 0.5 }).unwrap();
    cfg.channel_right = BoundaryKind::Wall;
    cfg.floodplain_exits = Vec::new();
    cfg.output_dt = 0.0;
    cfg.end_time = 1e9;
    let mut sim = Sim::new(cfg).unwrap();
    // The seam is genuinely non-conforming at this scale.
    let dx_channel = sim.mesh.blocks[1].dx;
    let dx_plain = sim.mesh.blocks[0].dx;
    assert!((dx_channel - dx_plain).abs() > 1e-4);
    let v0 = sim.total_volume();
    for _ in 0..1400 {
        sim.step().unwrap();
        let drift = (sim.total_volume() - v0).abs() / v0;
        assert!(drift <= 1e-12, "drift {drift:e} at t = {}", sim.t);
    }
    // Water must actually have crossed the seam into the floodplain.
    let flooded = sim
        .fields
        .cells2d
        .iter()
        .zip(&sim.mesh.cells)
        .any(|(w, c)| c.block == 0 && w.h > 0.01);
    assert!(flooded, "the dam break never crossed the seam by t = {}", sim.t);
}

#[test]
fn constant_inflow_keeps_floodplain_dry() {
    // Inflow held at the initial depth, below every wall: the coupling
    // must not leak a drop onto the floodplain.
    let mut cfg = build_case(&CaseSpec { case_id: 3, mode: Mode::Hcm, scale: 0.1 }).unwrap();
    cfg.inflow.amplitude = 0.0;
    cfg.end_time = 10.0;
    let result = run(cfg).unwrap();
    assert!(result.sim.fields.cells2d.iter().all(|w| w.h == 0.0));
}

#[test]
fn driver_step_composes_the_sub_steps() {
    // One HCM step must equal the hand-executed sequence: interface fluxes
    // and coupling terms from level-n data, then the 2D update, the 1D
    // update, the coupling application, and the lateral update.
    let mut cfg = build_case(&CaseSpec { case_id: 2, mode: Mode::Hcm, scale: 0.1 }).unwrap();
    cfg.output_dt = 0.0;
    let mut sim = Sim::new(cfg).unwrap();
    // Take a few steps so the state is non-trivial (flooding under way).
    for _ in 0..20 {
        sim.step().unwrap();
    }
    let fields = sim.fields.clone();
    let mesh = sim.mesh.clone();
    let dt = sim.planned_dt();
    let hb = sim.cfg.inflow.depth(sim.t);

    // Hand-executed trace.
    let iface = coupling::compute_interface_fluxes(
        &mesh,
        &fields.channel,
        &fields.lateral_n,
        &fields.lateral_s,
        &fields.cells2d,
    );
    let phis = coupling::assemble_all(&mesh, &iface);
    let new2d = solver2d::step_2d(&mesh, &fields.cells2d, dt, hb, &iface).unwrap();
    let ch = mesh.channel.as_ref().unwrap();
    let (starred, _) = solver1d::step_1d(ch, &fields.channel, dt, hb).unwrap();
    let coupled: Vec<_> = starred
        .iter()
        .zip(&phis)
        .map(|(w, phi)| apply_coupling(*w, *phi, dt).0)
        .collect();
    let (ln, ls) = lateral::step_lateral(
        &mesh,
        &fields.channel,
        &fields.lateral_n,
        &fields.lateral_s,
        &iface,
        dt,
        hb,
    );

    sim.advance(dt).unwrap();
    for (a, b) in sim.fields.cells2d.iter().zip(&new2d) {
        assert_eq!(a, b);
    }
    for (a, b) in sim.fields.channel.iter().zip(&coupled) {
        assert!((a.area - b.area).abs() < 1e-15);
        assert!((a.discharge - b.discharge).abs() < 1e-15);
    }
    assert_eq!(sim.fields.lateral_n, ln);
    assert_eq!(sim.fields.lateral_s, ls);
}

#[test]
fn identical_configs_give_identical_records() {
    let cfg = build_case(&CaseSpec { case_id: 1, mode: Mode::Hcm, scale: 0.15 }).unwrap();
    let mut cfg = cfg;
    cfg.end_time = 2.0;
    let a = run(cfg.clone()).unwrap();
    let b = run(cfg).unwrap();
    assert_eq!(a.step_count(), b.step_count());
    assert_eq!(a.records().len(), b.records().len());
    for (ra, rb) in a.records().iter().zip(b.records()) {
        assert_eq!(ra, rb);
    }
}

#[test]
fn sampling_does_not_perturb_state() {
    let mut cfg = build_case(&CaseSpec { case_id: 3, mode: Mode::Hcm, scale: 0.1 }).unwrap();
    cfg.end_time = 2.0;
    let mut sim = Sim::new(cfg).unwrap();
    for _ in 0..10 {
        sim.step().unwrap();
    }
    let before = sim.fields.clone();
    sim.record();
    sim.record();
    for (a, b) in sim.fields.cells2d.iter().zip(&before.cells2d) {
        assert_eq!(a, b);
    }
    let n = sim.records.len();
    assert_eq!(sim.records[n - 1], sim.records[n - 2]);
}

#[test]
fn channel_with_floodplains_on_both_sides() {
    // The general layout: one channel flanked by floodplains north and
    // south. Lake at rest must be an exact fixed point across both
    // couplings, and a closed dam-break must conserve volume while flooding
    // both plains.
    use floodsim::coupling::{assemble_all, compute_interface_fluxes};
    use floodsim::geometry::SectionState;
    use floodsim::mesh::{build_mesh, ChannelMeshing, ChannelSpec, DomainSpec, PlainSpec};
    use floodsim::sim::{cfl_dt, total_volume, Fields};
    use floodsim::solver2d::State2D;

    let make_mesh = || {
        build_mesh(DomainSpec {
            plains: vec![
                PlainSpec {
                    x0: 0.0,
                    x1: 4.0,
                    y0: 0.0,
                    y1: 1.0,
                    nx: 8,
                    ny: 2,
                    bed: Box::new(|_, _| 0.25),
                    manning: 0.009,
                    boundaries: [BoundaryKind::Wall; 4],
                },
                PlainSpec {
                    x0: 0.0,
                    x1: 4.0,
                    y0: 1.5,
                    y1: 2.5,
                    nx: 10,
                    ny: 2,
                    bed: Box::new(|_, _| 0.5),
                    manning: 0.009,
                    boundaries: [BoundaryKind::Wall; 4],
                },
            ],
            channel: Some(ChannelSpec {
                x0: 0.0,
                x1: 4.0,
                y_south: 1.0,
                y_north: 1.5,
                n_cells: 16,
                meshing: ChannelMeshing::OneD,
                bed: Box::new(|_| 0.0),
                bank_south: Box::new(|_| 0.25),
                bank_north: Box::new(|_| 0.5),
                manning: 0.009,
                ends: [BoundaryKind::Wall, BoundaryKind::Wall],
            }),
        })
        .unwrap()
    };

    // Lake at rest across all three regions: exact fixed point.
    let mesh = make_mesh();
    let ch = mesh.channel.as_ref().unwrap();
    let adj = mesh.adjacency.as_ref().unwrap();
    assert!(adj.north.iter().all(|p| p.iter().any(|e| e.cell2d.is_some())));
    assert!(adj.south.iter().all(|p| p.iter().any(|e| e.cell2d.is_some())));
    let eta = 0.75;
    let mut fields = Fields {
        cells2d: mesh.cells.iter().map(|c| State2D::new(eta - c.bed, 0.0, 0.0)).collect(),
        channel: ch
            .sections
            .iter()
            .map(|cs| SectionState::new(cs.width * (eta - cs.bed_elevation), 0.0))
            .collect(),
        lateral_n: vec![0.0; 16],
        lateral_s: vec![0.0; 16],
    };
    let rest = fields.clone();
    for _ in 0..200 {
        let iface = compute_interface_fluxes(
            &mesh,
            &fields.channel,
            &fields.lateral_n,
            &fields.lateral_s,
            &fields.cells2d,
        );
        for phi in assemble_all(&mesh, &iface) {
            assert_eq!((phi.phi_a, phi.phi_q), (0.0, 0.0));
        }
        let dt = cfl_dt(&mesh, &fields, 0.45, 1e-3);
        fields.cells2d = solver2d::step_2d(&mesh, &fields.cells2d, dt, 0.0, &iface).unwrap();
        let (starred, _) = solver1d::step_1d(ch, &fields.channel, dt, 0.0).unwrap();
        let (ln, ls) = lateral::step_lateral(
            &mesh,
            &fields.channel,
            &fields.lateral_n,
            &fields.lateral_s,
            &iface,
            dt,
            0.0,
        );
        fields.channel = starred;
        fields.lateral_n = ln;
        fields.lateral_s = ls;
    }
    for (a, b) in fields.cells2d.iter().zip(&rest.cells2d) {
        assert_eq!(a, b);
    }
    for (a, b) in fields.channel.iter().zip(&rest.channel) {
        assert_eq!(a, b);
    }
    assert!(fields.lateral_n.iter().all(|&v| v == 0.0));

    // Closed dam-break overtopping both walls: volume is conserved.
    let mesh = make_mesh();
    let ch = mesh.channel.as_ref().unwrap();
    let mut fields = Fields {
        cells2d: mesh.cells.iter().map(|_| State2D::ZERO).collect(),
        channel: (0..16)
            .map(|i| SectionState::new(ch.sections[i].width * if i < 8 { 0.9 } else { 0.1 }, 0.0))
            .collect(),
        lateral_n: vec![0.0; 16],
        lateral_s: vec![0.0; 16],
    };
    let v0 = total_volume(&mesh, &fields);
    let mut flooded_north = false;
    let mut flooded_south = false;
    for _ in 0..400 {
        let iface = compute_interface_fluxes(
            &mesh,
            &fields.channel,
            &fields.lateral_n,
            &fields.lateral_s,
            &fields.cells2d,
        );
        let phis = assemble_all(&mesh, &iface);
        let dt = cfl_dt(&mesh, &fields, 0.45, 1e-3);
        fields.cells2d = solver2d::step_2d(&mesh, &fields.cells2d, dt, 0.0, &iface).unwrap();
        let (starred, _) = solver1d::step_1d(ch, &fields.channel, dt, 0.0).unwrap();
        fields.channel = starred
            .iter()
            .zip(&phis)
            .map(|(w, phi)| apply_coupling(*w, *phi, dt).0)
            .collect();
        let (ln, ls) = lateral::step_lateral(
            &mesh,
            &fields.channel,
            &fields.lateral_n,
            &fields.lateral_s,
            &iface,
            dt,
            0.0,
        );
        fields.lateral_n = ln;
        fields.lateral_s = ls;
        for (w, c) in fields.cells2d.iter().zip(&mesh.cells) {
            if w.h > 1e-3 {
                if c.center.1 > 1.25 {
                    flooded_north = true;
                } else {
                    flooded_south = true;
                }
            }
        }
        let drift = (total_volume(&mesh, &fields) - v0).abs() / v0;
        assert!(drift <= 1e-12, "volume drift {drift:e}");
    }
    assert!(flooded_north && flooded_south, "both plains must flood");
    // Opposite sides carry opposite-signed lateral discharges on average.
    let sum_n: f64 = fields.lateral_n.iter().sum();
    let sum_s: f64 = fields.lateral_s.iter().sum();
    assert!(sum_n != 0.0 && sum_s != 0.0);
}

#[test]
fn open_boundaries_only_lose_volume_during_outflow() {
    // Sanity on the test-2 exits: with the south exit open, total volume
    // must never increase.
    let mut cfg = build_case(&CaseSpec { case_id: 2, mode: Mode::Fbm, scale: 0.15 }).unwrap();
    cfg.end_time = 3.0;
    cfg.output_dt = 0.0;
    cfg.floodplain_exits = vec![BlockSide::South];
    let mut sim = Sim::new(cfg).unwrap();
    let mut prev = sim.total_volume();
    while !sim.finished() {
        sim.step().unwrap();
        let v = sim.total_volume();
        assert!(v <= prev * (1.0 + 1e-12), "volume rose from {prev} to {v}");
        prev = v;
    }
}
