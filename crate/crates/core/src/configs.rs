//! Initial rotor configurations: independent uniform ones, the deterministic
//! box, line and alternating patterns, and uniform spanning trees oriented
//! toward the origin.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{in_ball, neighbors, Direction, Label, Vertex, ORIGIN};
use crate::rwlm::RotorSource;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigKind {
    /// Uniform label, stored as the label's canonical direction.
    IudHv,
    /// Uniform over the four neighbors.
    IudFour,
    Box,
    Line,
    Alternating,
    Ustp,
}

impl ConfigKind {
    pub const ALL: [ConfigKind; 6] =
        [ConfigKind::IudHv, ConfigKind::IudFour, ConfigKind::Box, ConfigKind::Line, ConfigKind::Alternating, ConfigKind::Ustp];

    pub fn name(self) -> &'static str {
        match self {
            ConfigKind::IudHv => "iud_hv",
            ConfigKind::IudFour => "iud_four",
            ConfigKind::Box => "box",
            ConfigKind::Line => "line",
            ConfigKind::Alternating => "alternating",
            ConfigKind::Ustp => "ustp",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, ConfigKind::IudHv | ConfigKind::IudFour | ConfigKind::Ustp)
    }
}

impl fmt::Display for ConfigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConfigKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ConfigKind::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "iud" && *k == ConfigKind::IudFour))
            .ok_or_else(|| Error::Usage(format!("unknown config kind '{s}'")))
    }
}

/// Which quarter-plane sector `v` lies in: 0 for arg ∈ (−π/4, π/4], then
/// counter-clockwise. Integer arithmetic only, so the half-open boundaries
/// are exact.
fn sector(v: Vertex) -> usize {
    let (x, y) = (v.x as i64, v.y as i64);
    if x > 0 && y > -x && y <= x {
        0
    } else if y > 0 && x < y && x >= -y {
        1
    } else if x < 0 && y >= x && y < -x {
        2
    } else {
        3
    }
}

pub fn box_rotor(v: Vertex) -> Direction {
    if v == ORIGIN {
        return Direction::East;
    }
    [Direction::North, Direction::West, Direction::South, Direction::East][sector(v)]
}

pub fn line_rotor(v: Vertex) -> Direction {
    if v == ORIGIN {
        return Direction::East;
    }
    [Direction::East, Direction::North, Direction::West, Direction::South][sector(v)]
}

pub fn alternating_label(v: Vertex) -> Label {
    if (v.y as i64 - v.x as i64).rem_euclid(2) == 0 {
        Label::H
    } else {
        Label::V
    }
}

pub fn iud_four_rotor(seed: u64, v: Vertex) -> Direction {
    Direction::from_index((seed::site_hash(seed, v.x, v.y) >> 62) as usize)
}

pub fn iud_hv_rotor(seed: u64, v: Vertex) -> Direction {
    if seed::site_hash(seed, v.x, v.y) >> 63 == 0 {
        Direction::East
    } else {
        Direction::North
    }
}

/// A uniform spanning tree of `B_radius` oriented toward the origin, with an
/// independent uniform rotor at the origin. Outside the ball rotors come
/// from an independent uniform configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UstpConfig {
    radius: u32,
    half: i32,
    rotors: Vec<u8>,
    fallback_seed: u64,
}

const OUTSIDE: u8 = u8::MAX;

impl UstpConfig {
    /// Wilson's algorithm on the subgraph induced by `B_radius`.
    pub fn sample(radius: u32, seed_value: u64) -> Result<Self> {
        if radius < 2 {
            return Err(Error::Parameter(format!("spanning tree radius must be >= 2, got {radius}")));
        }
        let r = radius as f64;
        let half = radius as i32;
        let side = (2 * half + 1) as usize;
        let idx = |v: Vertex| ((v.y + half) as usize) * side + (v.x + half) as usize;
        let mut rotors = vec![OUTSIDE; side * side];
        let mut in_tree = vec![false; side * side];
        let mut next = vec![0u8; side * side];
        let mut rng = seed::rng(seed_value);
        in_tree[idx(ORIGIN)] = true;
        let mut nbrs = Vec::with_capacity(4);
        for y in -half..=half {
            for x in -half..=half {
                let start = Vertex::new(x, y);
                if !in_ball(start, r) || in_tree[idx(start)] {
                    continue;
                }
                // Random walk until the tree is hit, remembering last exits.
                let mut u = start;
                while !in_tree[idx(u)] {
                    nbrs.clear();
                    nbrs.extend(Direction::ALL.into_iter().filter(|d| in_ball(u.step(*d), r)));
                    let d = nbrs[rng.random_range(0..nbrs.len())];
                    next[idx(u)] = d.index() as u8;
                    u = u.step(d);
                }
                // The last exits along the path from `start` form the erased loop.
                let mut u = start;
                while !in_tree[idx(u)] {
                    in_tree[idx(u)] = true;
                    rotors[idx(u)] = next[idx(u)];
                    u = u.step(Direction::from_index(next[idx(u)] as usize));
                }
            }
        }
        rotors[idx(ORIGIN)] = rng.random_range(0..4u8);
        Ok(UstpConfig { radius, half, rotors, fallback_seed: seed::derive(seed_value, seed::TAG_FALLBACK, 0) })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Whether `v` lies in the sampled tree rather than the fallback.
    pub fn covers(&self, v: Vertex) -> bool {
        v.x.abs() <= self.half && v.y.abs() <= self.half && self.rotors[self.index(v)] != OUTSIDE
    }

    fn index(&self, v: Vertex) -> usize {
        let side = (2 * self.half + 1) as usize;
        ((v.y + self.half) as usize) * side + (v.x + self.half) as usize
    }

    /// Follow rotors from every non-origin vertex of the ball; true when all
    /// reach the origin without repeating a vertex.
    pub fn is_oriented_spanning_tree(&self) -> bool {
        let r = self.radius as f64;
        let ball: Vec<Vertex> = crate::lattice::ball(r);
        let limit = ball.len();
        ball.iter().all(|&start| {
            let mut u = start;
            for _ in 0..=limit {
                if u == ORIGIN {
                    return true;
                }
                if !self.covers(u) {
                    return false;
                }
                u = u.step(self.rotor(u));
            }
            false
        })
    }
}

impl RotorSource for UstpConfig {
    fn rotor(&self, v: Vertex) -> Direction {
        if self.covers(v) {
            Direction::from_index(self.rotors[self.index(v)] as usize)
        } else {
            iud_four_rotor(self.fallback_seed, v)
        }
    }
}

/// A materialized configuration.
#[derive(Clone, Debug)]
pub enum Config {
    Lazy { kind: ConfigKind, seed: u64 },
    Ustp(UstpConfig),
}

impl RotorSource for Config {
    #[inline]
    fn rotor(&self, v: Vertex) -> Direction {
        match self {
            Config::Lazy { kind, seed } => match kind {
                ConfigKind::IudHv => iud_hv_rotor(*seed, v),
                ConfigKind::IudFour => iud_four_rotor(*seed, v),
                ConfigKind::Box => box_rotor(v),
                ConfigKind::Line => line_rotor(v),
                ConfigKind::Alternating => alternating_label(v).canonical_direction(),
                ConfigKind::Ustp => unreachable!("spanning tree configs are materialized"),
            },
            Config::Ustp(u) => u.rotor(v),
        }
    }
}

/// A family of configurations, indexed by trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigGenerator {
    pub kind: ConfigKind,
    pub seed: u64,
    /// Radius of the sampled tree (spanning tree kind only).
    pub ustp_radius: u32,
}

impl ConfigGenerator {
    pub fn new(kind: ConfigKind, seed: u64) -> Self {
        ConfigGenerator { kind, seed, ustp_radius: 64 }
    }

    pub fn with_ustp_radius(mut self, radius: u32) -> Self {
        self.ustp_radius = radius;
        self
    }

    /// The configuration for this generator's own seed.
    pub fn build(&self) -> Result<Config> {
        self.build_with_seed(self.seed)
    }

    fn build_with_seed(&self, s: u64) -> Result<Config> {
        Ok(match self.kind {
            ConfigKind::Ustp => Config::Ustp(UstpConfig::sample(self.ustp_radius, s)?),
            kind => Config::Lazy { kind, seed: s },
        })
    }

    /// An independent configuration for trial `i`; deterministic kinds give
    /// the same configuration every time.
    pub fn for_trial(&self, i: u64) -> Result<Config> {
        if self.kind.is_random() {
            self.build_with_seed(seed::derive(self.seed, seed::TAG_CONFIG, i))
        } else {
            self.build()
        }
    }
}

/// Empirical H frequency of a vertex over independent configurations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelFrequency {
    pub vertex: Vertex,
    pub samples: u64,
    pub h_count: u64,
}

impl LabelFrequency {
    pub fn freq_h(&self) -> f64 {
        self.h_count as f64 / self.samples as f64
    }

    /// Distance from 1/2 in binomial standard deviations.
    pub fn sigma_from_half(&self) -> f64 {
        let n = self.samples as f64;
        (self.h_count as f64 - n / 2.0).abs() / (n / 4.0).sqrt()
    }
}

/// Label of `v` under `samples` independent draws of `gen`.
pub fn label_law_check(gen: &ConfigGenerator, v: Vertex, samples: u64) -> Result<LabelFrequency> {
    let mut h_count = 0;
    for i in 0..samples {
        if gen.for_trial(i)?.label(v) == Label::H {
            h_count += 1;
        }
    }
    Ok(LabelFrequency { vertex: v, samples, h_count })
}

/// CSV dump `x,y,direction` over the square `[-half, half]²`.
pub fn write_config_csv<W: Write>(src: &dyn RotorSource, half: i32, mut out: W) -> Result<()> {
    writeln!(out, "x,y,direction")?;
    for y in -half..=half {
        for x in -half..=half {
            let v = Vertex::new(x, y);
            writeln!(out, "{},{},{}", x, y, src.rotor(v).as_char())?;
        }
    }
    Ok(())
}

/// Arrow-field SVG of the configuration on `[-half, half]²`.
pub fn render_arrows(src: &dyn RotorSource, half: i32, cell: f64) -> String {
    let side = (2 * half + 1) as f64 * cell;
    let mut s = String::new();
    s.push_str(&format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{side}\" height=\"{side}\" viewBox=\"0 0 {side} {side}\">\n"
    ));
    s.push_str("<defs><marker id=\"h\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"4\" markerHeight=\"4\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#222\"/></marker></defs>\n");
    s.push_str(&format!("<rect width=\"{side}\" height=\"{side}\" fill=\"white\"/>\n"));
    for y in -half..=half {
        for x in -half..=half {
            let v = Vertex::new(x, y);
            let cx = (x + half) as f64 * cell + cell / 2.0;
            // SVG y grows downward.
            let cy = (half - y) as f64 * cell + cell / 2.0;
            let o = src.rotor(v).offset();
            let len = cell * 0.38;
            let (dx, dy) = (o.x as f64 * len, -(o.y as f64) * len);
            let colour = if v == ORIGIN { "#c0392b" } else { "#222" };
            s.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{colour}\" stroke-width=\"{:.2}\" marker-end=\"url(#h)\"/>\n",
                cx - dx,
                cy - dy,
                cx + dx,
                cy + dy,
                cell * 0.08
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

/// In-ball neighbors of `v`, in canonical order.
pub fn ball_neighbors(v: Vertex, r: f64) -> Vec<Vertex> {
    neighbors(v).into_iter().filter(|u| in_ball(*u, r)).collect()
}
