//! CSV writers for probe time series and field snapshots.
//!
//! Values are printed with 17 significant digits so files parse back to the
//! exact binary values; output is byte-stable across identical runs.

use std::io::Write;
use std::path::Path;

use crate::mesh::CoupledMesh;
use crate::sim::{Fields, Probe, ProbeRecord};
use crate::{Error, Result, DRY_DEPTH};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write probe records: one row per probe per sample.
pub fn write_probes(records: &[ProbeRecord], probes: &[Probe], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Geometry("no probe records to write".into()));
    }
    let mut s = String::from("t,probe_id,eta,H,u,v\n");
    for rec in records {
        for (p, smp) in probes.iter().zip(&rec.samples) {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt(rec.time),
                p.id,
                fmt(smp.eta),
                fmt(smp.h),
                fmt(smp.u),
                fmt(smp.v)
            ));
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(s.as_bytes())?;
    Ok(())
}

/// One parsed probe row.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub t: f64,
    pub id: String,
    pub eta: f64,
    pub h: f64,
    pub u: f64,
    pub v: f64,
}

/// Parse a probe CSV back (testing and post-processing).
pub fn parse_probes(text: &str) -> Result<Vec<ProbeRow>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line != "t,probe_id,eta,H,u,v" {
                return Err(Error::Config { line: 1, msg: format!("bad header '{line}'") });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 6 {
            return Err(Error::Config { line: idx + 1, msg: "expected 6 fields".into() });
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Config { line: idx + 1, msg: format!("bad number '{s}'") })
        };
        rows.push(ProbeRow {
            t: num(parts[0])?,
            id: parts[1].to_string(),
            eta: num(parts[2])?,
            h: num(parts[3])?,
            u: num(parts[4])?,
            v: num(parts[5])?,
        });
    }
    Ok(rows)
}

/// Write a field snapshot: all 2D cells, then all channel cells. Channel
/// rows carry the two subcell lateral velocities in the extra columns;
/// 2D rows leave them empty.
pub fn write_snapshot(mesh: &CoupledMesh, fields: &Fields, path: &Path) -> Result<()> {
    let mut s = String::from("x,y,zb,H,eta,u,v,vN,vS\n");
    for (w, c) in fields.cells2d.iter().zip(&mesh.cells) {
        let (u, v) = w.velocity();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},,\n",
            fmt(c.center.0),
            fmt(c.center.1),
            fmt(c.bed),
            fmt(w.h),
            fmt(w.eta(c.bed)),
            fmt(u),
            fmt(v)
        ));
    }
    if let Some(ch) = &mesh.channel {
        let y = ch.centerline_y();
        for (i, w) in fields.channel.iter().enumerate() {
            let cs = &ch.sections[i];
            let h = w.depth(cs);
            let (vn, vs) = if h > DRY_DEPTH {
                (fields.lateral_n[i] / h, fields.lateral_s[i] / h)
            } else {
                (0.0, 0.0)
            };
            s.push_str(&format!(
                "{},{},{},{},{},{},,{},{}\n",
                fmt(ch.center(i)),
                fmt(y),
                fmt(cs.bed_elevation),
                fmt(h),
                fmt(w.surface_elevation(cs)),
                fmt(w.velocity(cs)),
                fmt(vn),
                fmt(vs)
            ));
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(s.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ProbeSample;
    use crate::solver2d::State2D;

    fn tmp(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("floodsim_test_{}_{name}", std::process::id()));
        p
    }

    #[test]
    fn probe_round_trip_is_exact() {
        let probes = vec![
            Probe { id: "P1".into(), x: 0.0, y: 0.0 },
            Probe { id: "P2".into(), x: 1.0, y: 0.0 },
        ];
        let records = vec![ProbeRecord {
            time: std::f64::consts::LN_2,
            samples: vec![
                ProbeSample { eta: 1.0 / 3.0, h: 2.0 / 7.0, u: -0.1, v: 1e-17 },
                ProbeSample { eta: 0.0, h: 0.0, u: 0.0, v: 0.0 },
            ],
        }];
        let path = tmp("probes.csv");
        write_probes(&records, &probes, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let rows = parse_probes(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].t, records[0].time);
        assert_eq!(rows[0].eta, 1.0 / 3.0);
        assert_eq!(rows[0].h, 2.0 / 7.0);
        assert_eq!(rows[1].id, "P2");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn empty_probe_list_gives_header_only() {
        let records = vec![ProbeRecord { time: 0.0, samples: vec![] }];
        let path = tmp("empty.csv");
        write_probes(&records, &[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "t,probe_id,eta,H,u,v\n");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn one_record_one_probe_is_two_lines() {
        let probes = vec![Probe { id: "P1".into(), x: 0.0, y: 0.0 }];
        let records = vec![ProbeRecord {
            time: 0.0,
            samples: vec![ProbeSample { eta: 0.1, h: 0.1, u: 0.0, v: 0.0 }],
        }];
        let path = tmp("single.csv");
        write_probes(&records, &probes, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn snapshot_columns_reflect_the_state() {
        use crate::cases::{build_case, setup, CaseSpec};
        use crate::sim::Mode;

        // Lake at rest: the eta column is constant across 2D and channel rows.
        let mut cfg = build_case(&CaseSpec { case_id: 2, mode: Mode::Hcm, scale: 0.1 }).unwrap();
        cfg.initial_still_eta = Some(1.6);
        let (mesh, fields) = setup(&cfg).unwrap();
        let path = tmp("rest.csv");
        write_snapshot(&mesh, &fields, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        for line in text.lines().skip(1) {
            let eta: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
            assert!((eta - 1.6).abs() < 1e-12, "{line}");
        }
        std::fs::remove_file(&path).ok();

        // Pre-overtopping channel state: every floodplain row reads H = 0.
        let cfg = build_case(&CaseSpec { case_id: 3, mode: Mode::Hcm, scale: 0.1 }).unwrap();
        let (mesh, fields) = setup(&cfg).unwrap();
        let path = tmp("dry.csv");
        write_snapshot(&mesh, &fields, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        for line in text.lines().skip(1).filter(|l| l.ends_with(",,")) {
            let h: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
            assert_eq!(h, 0.0, "{line}");
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn snapshot_of_unit_grid_has_two_lines() {
        let mesh = crate::mesh::build_mesh(crate::mesh::DomainSpec {
            plains: vec![crate::mesh::PlainSpec {
                x0: 0.0,
                x1: 1.0,
                y0: 0.0,
                y1: 1.0,
                nx: 1,
                ny: 1,
                bed: Box::new(|_, _| 0.25),
                manning: 0.0,
                boundaries: [crate::mesh::BoundaryKind::Wall; 4],
            }],
            channel: None,
        })
        .unwrap();
        let fields = Fields {
            cells2d: vec![State2D::new(0.5, 0.0, 0.0)],
            ..Default::default()
        };
        let path = tmp("snapshot.csv");
        write_snapshot(&mesh, &fields, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].ends_with(",,"));
        // eta = zb + H.
        assert!(lines[1].contains(&fmt(0.75)));
        std::fs::remove_file(&path).ok();
    }
}
