use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{output_file, ExperimentSpec};
use crate::configs::ConfigGenerator;
use crate::error::{Error, Result};
use crate::lattice::Vertex;
use crate::martingale::mean_stderr;
use crate::rwlm::{FreeWalk, LocalMechanism, RotorSource};
use crate::seed;

/// The single-walker trajectories of the first-visit figure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenderPreset {
    /// Rotor walk turning clockwise (p = 0).
    RotorCw,
    /// Rotor walk turning counter-clockwise (p = 1).
    RotorCcw,
    /// H–V walk at q = 1.
    Hv,
    /// H–V walk at q = 1/2, which is simple random walk.
    Srw,
}

impl RenderPreset {
    pub const ALL: [RenderPreset; 4] = [RenderPreset::RotorCw, RenderPreset::RotorCcw, RenderPreset::Hv, RenderPreset::Srw];

    pub fn name(self) -> &'static str {
        match self {
            RenderPreset::RotorCw => "rotor-cw",
            RenderPreset::RotorCcw => "rotor-ccw",
            RenderPreset::Hv => "hv",
            RenderPreset::Srw => "srw",
        }
    }

    pub fn mechanism(self) -> LocalMechanism {
        match self {
            RenderPreset::RotorCw => LocalMechanism::p_rotor(0.0),
            RenderPreset::RotorCcw => LocalMechanism::p_rotor(1.0),
            RenderPreset::Hv => LocalMechanism::hv(1.0),
            RenderPreset::Srw => LocalMechanism::hv(0.5),
        }
        .expect("preset parameters are in range")
    }
}

impl FromStr for RenderPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RenderPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown preset '{s}' (rotor-cw, rotor-ccw, hv, srw)")))
    }
}

/// Undirected edges in order of first traversal, with the step (from 1)
/// at which each was first crossed.
pub fn first_visit_edges(
    source: &dyn RotorSource,
    mech: LocalMechanism,
    steps: u64,
    walk_seed: u64,
) -> Vec<(Vertex, Vertex, u64)> {
    let half = ((steps as f64).sqrt() as i32 * 2).clamp(16, 1024);
    let mut walk = FreeWalk::new(source, mech, half);
    let mut rng = seed::rng(walk_seed);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for t in 1..=steps {
        let ev = walk.step(&mut rng);
        let e = if ev.from <= ev.to { (ev.from, ev.to) } else { (ev.to, ev.from) };
        if seen.insert(e) {
            out.push((e.0, e.1, t));
        }
    }
    out
}

const RAMP: [[u8; 3]; 9] = [
    [0x44, 0x01, 0x54],
    [0x47, 0x2d, 0x7b],
    [0x3b, 0x52, 0x8b],
    [0x2c, 0x72, 0x8e],
    [0x21, 0x91, 0x8c],
    [0x28, 0xae, 0x80],
    [0x5e, 0xc9, 0x62],
    [0xad, 0xdc, 0x30],
    [0xfd, 0xe7, 0x25],
];

/// Color for `s ∈ [0, 1]` on a fixed dark-purple to yellow ramp.
pub fn ramp_color(s: f64) -> String {
    let s = s.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (s.floor() as usize).min(RAMP.len() - 2);
    let f = s - i as f64;
    let c: Vec<u8> =
        (0..3).map(|j| (RAMP[i][j] as f64 + f * (RAMP[i + 1][j] as f64 - RAMP[i][j] as f64)).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// SVG of the edges, colored by first-visit time over `[0, steps]`.
pub fn render_svg(edges: &[(Vertex, Vertex, u64)], steps: u64) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (0, 0, 0, 0);
    for &(a, b, _) in edges {
        for v in [a, b] {
            x0 = x0.min(v.x);
            x1 = x1.max(v.x);
            y0 = y0.min(v.y);
            y1 = y1.max(v.y);
        }
    }
    let (w, h) = (x1 - x0 + 2, y1 - y0 + 2);
    let scale = (800.0 / w.max(h) as f64).min(20.0);
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"{} {} {} {}\">",
        w as f64 * scale,
        h as f64 * scale,
        x0 - 1,
        -y1 - 1,
        w,
        h
    );
    let _ = writeln!(s, "<rect x=\"{}\" y=\"{}\" width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>", x0 - 1, -y1 - 1);
    s.push_str("<g stroke-width=\"0.35\" stroke-linecap=\"square\">\n");
    for &(a, b, t) in edges {
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"/>",
            a.x,
            -a.y,
            b.x,
            -b.y,
            ramp_color(t as f64 / steps as f64)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Render one trajectory. `spec.preset` picks the mechanism if set,
/// otherwise the spec's walk kind does.
pub fn cmd_render(spec: &ExperimentSpec) -> Result<PathBuf> {
    spec.validate()?;
    let mech = match spec.preset {
        Some(p) => p.mechanism(),
        None => spec.mechanism()?,
    };
    let config = spec.generator().build()?;
    let edges = first_visit_edges(&config, mech, spec.steps, seed::derive(spec.seed, seed::TAG_WALK, 0));
    let path = output_file(spec, "render.svg")?;
    fs::write(&path, render_svg(&edges, spec.steps))?;
    Ok(path)
}

/// `E|X_t|² / t` over independent walks, each on its own configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsdEstimate {
    pub t: u64,
    pub trials: u64,
    pub ratio: f64,
    pub stderr: f64,
}

pub fn mean_square_displacement(
    mech: LocalMechanism,
    config: &ConfigGenerator,
    t: u64,
    trials: u64,
    seed: u64,
) -> Result<MsdEstimate> {
    if t == 0 || trials < 2 {
        return Err(Error::Parameter("need t >= 1 and at least two trials".into()));
    }
    config.for_trial(0)?;
    let half = ((t as f64).sqrt() as i32 * 3).clamp(16, 512);
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let env = config.for_trial(i).expect("validated");
            let mut walk = FreeWalk::new(&env, mech.clone(), half);
            let mut rng = seed::rng(seed::derive(seed, seed::TAG_WALK, i));
            for _ in 0..t {
                walk.step(&mut rng);
            }
            walk.position().norm_sq() as f64 / t as f64
        })
        .collect();
    let (ratio, stderr) = mean_stderr(&ratios);
    Ok(MsdEstimate { t, trials, ratio, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::ConfigKind;

    #[test]
    fn one_step_one_edge() {
        let config = ConfigGenerator::new(ConfigKind::IudFour, 3).build().unwrap();
        let edges = first_visit_edges(&config, RenderPreset::Hv.mechanism(), 1, 7);
        assert_eq!(edges.len(), 1);
        let svg = render_svg(&edges, 1);
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp_color(0.0), "#440154");
        assert_eq!(ramp_color(1.0), "#fde725");
        assert_eq!(ramp_color(-3.0), ramp_color(0.0));
    }

    #[test]
    fn render_reproducible() {
        let config = ConfigGenerator::new(ConfigKind::IudHv, 11).build().unwrap();
        let a = render_svg(&first_visit_edges(&config, RenderPreset::Hv.mechanism(), 2000, 5), 2000);
        let b = render_svg(&first_visit_edges(&config, RenderPreset::Hv.mechanism(), 2000, 5), 2000);
        assert_eq!(a, b);
    }

    #[test]
    fn clockwise_rotor_walk_is_deterministic() {
        let config = ConfigGenerator::new(ConfigKind::IudFour, 2).build().unwrap();
        let a = first_visit_edges(&config, RenderPreset::RotorCw.mechanism(), 500, 1);
        let b = first_visit_edges(&config, RenderPreset::RotorCw.mechanism(), 500, 99);
        assert_eq!(a, b);
    }

    #[test]
    fn presets_parse() {
        for p in RenderPreset::ALL {
            assert_eq!(p.name().parse::<RenderPreset>().unwrap(), p);
        }
        assert!("figure".parse::<RenderPreset>().is_err());
    }
}
