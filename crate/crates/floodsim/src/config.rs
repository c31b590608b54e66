//! Line-oriented `key = value` configuration files with sections.
//!
//! The format covers everything in [`SimConfig`]; the built-in cases
//! round-trip through it, and the boundary tags are editable. Unknown keys
//! and sections are rejected with the offending line number.

use std::path::Path;

use crate::mesh::{BlockSide, BoundaryKind};
use crate::sim::{InflowSpec, Mode, Probe, SimConfig};
use crate::{Error, Result};

fn boundary_kind_str(k: BoundaryKind) -> &'static str {
    match k {
        BoundaryKind::Wall => "wall",
        BoundaryKind::Open => "open",
        BoundaryKind::InflowDepth => "inflow",
    }
}

fn side_str(s: BlockSide) -> &'static str {
    match s {
        BlockSide::West => "west",
        BlockSide::East => "east",
        BlockSide::South => "south",
        BlockSide::North => "north",
    }
}

/// Serialize a configuration; `parse_config_str` restores it exactly.
pub fn write_config(cfg: &SimConfig) -> String {
    let mut s = String::new();
    s.push_str("[run]\n");
    s.push_str(&format!("mode = {}\n", cfg.mode.as_str()));
    s.push_str(&format!("end_time = {}\n", cfg.end_time));
    s.push_str(&format!("cfl = {}\n", cfg.cfl));
    s.push_str(&format!("output_dt = {}\n", cfg.output_dt));
    s.push_str(&format!("fallback_dt = {}\n", cfg.fallback_dt));
    s.push_str("\n[mesh]\n");
    s.push_str(&format!("case = {}\n", cfg.case_id));
    s.push_str(&format!("scale = {}\n", cfg.scale));
    s.push_str("\n[physics]\n");
    s.push_str(&format!("manning_channel = {}\n", cfg.manning_channel));
    s.push_str(&format!("manning_floodplain = {}\n", cfg.manning_floodplain));
    s.push_str("\n[boundary]\n");
    s.push_str(&format!("channel_left = {}\n", boundary_kind_str(cfg.channel_left)));
    s.push_str(&format!("channel_right = {}\n", boundary_kind_str(cfg.channel_right)));
    let exits = if cfg.floodplain_exits.is_empty() {
        "none".to_string()
    } else {
        cfg.floodplain_exits.iter().map(|e| side_str(*e)).collect::<Vec<_>>().join(",")
    };
    s.push_str(&format!("floodplain_exits = {exits}\n"));
    s.push_str("\n[inflow]\n");
    s.push_str(&format!("eta0 = {}\n", cfg.inflow.eta0));
    s.push_str(&format!("amplitude = {}\n", cfg.inflow.amplitude));
    s.push_str(&format!("ramp = {}\n", cfg.inflow.ramp));
    s.push_str("\n[initial]\n");
    if let Some(eta) = cfg.initial_still_eta {
        s.push_str(&format!("still_eta = {eta}\n"));
    }
    if let Some(d) = cfg.initial_channel_depth {
        s.push_str(&format!("channel_depth = {d}\n"));
    }
    s.push_str("\n[probes]\n");
    for p in &cfg.probes {
        s.push_str(&format!("{} = {}, {}\n", p.id, p.x, p.y));
    }
    s
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn parse_f64(line: usize, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|_| err(line, format!("expected a number, got '{v}'")))
}

fn parse_boundary(line: usize, v: &str) -> Result<BoundaryKind> {
    match v {
        "wall" => Ok(BoundaryKind::Wall),
        "open" => Ok(BoundaryKind::Open),
        "inflow" => Ok(BoundaryKind::InflowDepth),
        other => Err(err(line, format!("unknown boundary kind '{other}'"))),
    }
}

/// Parse a configuration from text. Missing required keys (`run.mode`,
/// `run.end_time`, `mesh.case`) are reported by name.
pub fn parse_config_str(text: &str) -> Result<SimConfig> {
    let mut mode: Option<Mode> = None;
    let mut end_time: Option<f64> = None;
    let mut case_id: Option<u32> = None;

    let mut cfg = SimConfig {
        mode: Mode::Hcm,
        end_time: 0.0,
        cfl: 0.45,
        output_dt: 0.05,
        fallback_dt: 1e-3,
        case_id: 0,
        scale: 1.0,
        manning_channel: crate::cases::MANNING,
        manning_floodplain: crate::cases::MANNING,
        channel_left: BoundaryKind::Wall,
        channel_right: BoundaryKind::Open,
        floodplain_exits: Vec::new(),
        inflow: InflowSpec { eta0: 0.0, amplitude: 0.0, ramp: 1.0 },
        initial_still_eta: None,
        initial_channel_depth: None,
        probes: Vec::new(),
    };

    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(err(line_no, "unterminated section header"));
            }
            section = line[1..line.len() - 1].trim().to_string();
            match section.as_str() {
                "run" | "mesh" | "physics" | "boundary" | "inflow" | "initial" | "probes" => {}
                other => return Err(err(line_no, format!("unknown section '[{other}]'"))),
            }
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => return Err(err(line_no, "expected 'key = value'")),
        };
        match (section.as_str(), key) {
            ("run", "mode") => {
                mode = Some(value.parse().map_err(|e: String| err(line_no, e))?);
            }
            ("run", "end_time") => end_time = Some(parse_f64(line_no, value)?),
            ("run", "cfl") => cfg.cfl = parse_f64(line_no, value)?,
            ("run", "output_dt") => cfg.output_dt = parse_f64(line_no, value)?,
            ("run", "fallback_dt") => cfg.fallback_dt = parse_f64(line_no, value)?,
            ("mesh", "case") => {
                case_id = Some(
                    value.parse::<u32>().map_err(|_| err(line_no, "case must be an integer"))?,
                );
            }
            ("mesh", "scale") => cfg.scale = parse_f64(line_no, value)?,
            ("physics", "manning_channel") => cfg.manning_channel = parse_f64(line_no, value)?,
            ("physics", "manning_floodplain") => {
                cfg.manning_floodplain = parse_f64(line_no, value)?
            }
            ("boundary", "channel_left") => cfg.channel_left = parse_boundary(line_no, value)?,
            ("boundary", "channel_right") => cfg.channel_right = parse_boundary(line_no, value)?,
            ("boundary", "floodplain_exits") => {
                cfg.floodplain_exits.clear();
                if value != "none" {
                    for part in value.split(',') {
                        let side = match part.trim() {
                            "west" => BlockSide::West,
                            "east" => BlockSide::East,
                            "south" => BlockSide::South,
                            "north" => BlockSide::North,
                            other => {
                                return Err(err(line_no, format!("unknown side '{other}'")))
                            }
                        };
                        cfg.floodplain_exits.push(side);
                    }
                }
            }
            ("inflow", "eta0") => cfg.inflow.eta0 = parse_f64(line_no, value)?,
            ("inflow", "amplitude") => cfg.inflow.amplitude = parse_f64(line_no, value)?,
            ("inflow", "ramp") => cfg.inflow.ramp = parse_f64(line_no, value)?,
            ("initial", "still_eta") => cfg.initial_still_eta = Some(parse_f64(line_no, value)?),
            ("initial", "channel_depth") => {
                cfg.initial_channel_depth = Some(parse_f64(line_no, value)?)
            }
            ("probes", id) => {
                let (x, y) = value
                    .split_once(',')
                    .ok_or_else(|| err(line_no, "probe needs 'x, y'"))?;
                cfg.probes.push(Probe {
                    id: id.to_string(),
                    x: parse_f64(line_no, x)?,
                    y: parse_f64(line_no, y)?,
                });
            }
            ("", key) => return Err(err(line_no, format!("key '{key}' outside any section"))),
            (section, key) => {
                return Err(err(line_no, format!("unknown key '{key}' in section '[{section}]'")))
            }
        }
    }

    cfg.mode = mode.ok_or_else(|| err(0, "missing required key 'mode' in [run]"))?;
    cfg.end_time = end_time.ok_or_else(|| err(0, "missing required key 'end_time' in [run]"))?;
    cfg.case_id = case_id.ok_or_else(|| err(0, "missing required key 'case' in [mesh]"))?;
    Ok(cfg)
}

/// Parse a configuration file.
pub fn parse_config(path: &Path) -> Result<SimConfig> {
    parse_config_str(&std::fs::read_to_string(path)?)
}
