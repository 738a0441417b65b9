//! Experiment drivers behind the `hvlab` command line.
//!
//! Every command takes an [`ExperimentSpec`], built from defaults, then an
//! optional flat `key=value` file, then flags; later sources win. Outputs are
//! pure functions of the spec.

mod q0;
mod render;
mod stationarity;

pub use q0::{
    alternating_increments, blocked_site_visits, box_returns, cmd_q0_experiments, find_blocked_site, is_blocked,
    AlternatingReport, BlockedReport, BoxReport, Q0Report,
};
pub use render::{
    cmd_render, first_visit_edges, mean_square_displacement, ramp_color, render_svg, MsdEstimate, RenderPreset,
};
pub use stationarity::{cmd_stationarity_probe, StationarityReport, WindowReport};

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::configs::{ConfigGenerator, ConfigKind};
use crate::error::{Error, Result};
use crate::kernel::KernelTable;
use crate::lattice::Vertex;
use crate::martingale::{cell_report, run_cell, write_cell_csv, Cell, CellReport, TrialRecord};
use crate::paths::{enumerate_parities, PathEnumeration};
use crate::rwlm::LocalMechanism;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkKind {
    Hv,
    PRotor,
    Q0Frozen,
}

impl FromStr for WalkKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hv" => Ok(WalkKind::Hv),
            "p_rotor" | "p-rotor" | "rotor" => Ok(WalkKind::PRotor),
            "q0_frozen" | "q0-frozen" | "q0" => Ok(WalkKind::Q0Frozen),
            _ => Err(Error::Usage(format!("unknown walk kind '{s}'"))),
        }
    }
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkKind::Hv => "hv",
            WalkKind::PRotor => "p_rotor",
            WalkKind::Q0Frozen => "q0_frozen",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub walk: WalkKind,
    pub q: Vec<f64>,
    pub p: f64,
    pub n: Vec<usize>,
    pub config: ConfigKind,
    pub seed: u64,
    pub k: Vec<u64>,
    pub r: Vec<u32>,
    pub trials: u64,
    pub steps: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub preset: Option<RenderPreset>,
    pub ustp_radius: u32,
    pub depth: usize,
    pub target: Vertex,
    pub window: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            walk: WalkKind::Hv,
            q: vec![0.5],
            p: 0.0,
            n: vec![1],
            config: ConfigKind::IudFour,
            seed: 1,
            k: vec![1],
            r: vec![30],
            trials: 1000,
            steps: 10_000,
            out: PathBuf::from("out"),
            threads: None,
            preset: None,
            ustp_radius: 64,
            depth: 30,
            target: Vertex::new(3, 1),
            window: 2,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Usage(format!("bad value '{v}' for {key}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(key, s)).collect()
}

impl ExperimentSpec {
    /// Set one key. Keys are the long flag names; `_` and `-` are
    /// interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let v = value.trim();
        match key.as_str() {
            "walk" => self.walk = v.parse()?,
            "q" => self.q = parse_list("q", v)?,
            "p" => self.p = parse("p", v)?,
            "n" => self.n = parse_list("n", v)?,
            "config" => self.config = v.parse()?,
            "seed" => self.seed = parse("seed", v)?,
            "k" => self.k = parse_list("k", v)?,
            "r" => self.r = parse_list("r", v)?,
            "trials" => self.trials = parse("trials", v)?,
            "steps" => self.steps = parse("steps", v)?,
            "out" => self.out = PathBuf::from(v),
            "threads" => self.threads = Some(parse("threads", v)?),
            "preset" => self.preset = Some(v.parse()?),
            "ustp-radius" => self.ustp_radius = parse("ustp-radius", v)?,
            "depth" => self.depth = parse("depth", v)?,
            "target" => {
                let xy: Vec<i32> = parse_list("target", v)?;
                match xy[..] {
                    [x, y] => self.target = Vertex::new(x, y),
                    _ => return Err(Error::Usage(format!("target must be 'x,y', got '{v}'"))),
                }
            }
            "window" => self.window = parse("window", v)?,
            _ => return Err(Error::Usage(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Apply a flat `key=value` file. Blank lines and `#` comments are
    /// skipped.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("line {}: expected key=value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Usage(m));
        if self.q.is_empty() || self.n.is_empty() || self.k.is_empty() || self.r.is_empty() {
            return bad("q, n, k and r grids must be nonempty".into());
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.steps == 0 {
            return bad("steps must be >= 1".into());
        }
        if let Some(&q) = self.q.iter().find(|&&q| !(q > 0.0 && q <= 1.0)) {
            return bad(format!("q must lie in (0,1], got {q}"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p must lie in [0,1], got {}", self.p));
        }
        if self.n.contains(&0) {
            return bad("n must be >= 1".into());
        }
        if self.r.contains(&0) {
            return bad("r must be >= 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        if !(1..=3).contains(&self.window) {
            return bad("window must be 1, 2 or 3".into());
        }
        Ok(())
    }

    pub fn generator(&self) -> ConfigGenerator {
        ConfigGenerator::new(self.config, self.seed).with_ustp_radius(self.ustp_radius)
    }

    /// The local mechanism for the first `q` of the grid (or `p`).
    pub fn mechanism(&self) -> Result<LocalMechanism> {
        match self.walk {
            WalkKind::Hv => LocalMechanism::hv(self.q[0]),
            WalkKind::PRotor => LocalMechanism::p_rotor(self.p),
            WalkKind::Q0Frozen => Ok(LocalMechanism::hv_frozen_labels()),
        }
    }

    /// Cells in grid order: q outermost, then n, k, r.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &q in &self.q {
            for &n in &self.n {
                for &k in &self.k {
                    for &r in &self.r {
                        out.push(Cell { q, n, k, r });
                    }
                }
            }
        }
        out
    }
}

/// Process exit code for an error: 1 for usage, 2 for anything at run time.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Parameter(_) => 1,
        _ => 2,
    }
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// `spec.out` if it names a file with the same extension as `default_name`,
/// otherwise `default_name` inside the directory `spec.out`.
pub fn output_file(spec: &ExperimentSpec, default_name: &str) -> Result<PathBuf> {
    let ext = Path::new(default_name).extension();
    let path = if spec.out.extension().is_some() && spec.out.extension() == ext {
        spec.out.clone()
    } else {
        spec.out.join(default_name)
    };
    create_parent(&path)?;
    Ok(path)
}

/// Write `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    create_parent(path)?;
    let mut f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TrialLine<'a> {
    q: f64,
    n: usize,
    k: u64,
    r: u32,
    #[serde(flatten)]
    record: &'a TrialRecord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateSummary {
    pub cells: Vec<CellReport>,
    pub cap_hits: u64,
    pub csv: PathBuf,
    pub jsonl: PathBuf,
}

/// Run every cell of the grid. Writes `cells.csv` and `trials.jsonl` into
/// the output directory.
pub fn cmd_simulate(spec: &ExperimentSpec) -> Result<SimulateSummary> {
    spec.validate()?;
    if spec.walk != WalkKind::Hv {
        return Err(Error::Usage(format!("simulate needs --walk hv, got {}", spec.walk)));
    }
    let r_max = *spec.r.iter().max().expect("validated");
    let kernel = KernelTable::build(r_max.max(8))?;
    let gen = spec.generator();
    fs::create_dir_all(&spec.out)?;
    let csv = spec.out.join("cells.csv");
    let jsonl = spec.out.join("trials.jsonl");
    let mut lines = BufWriter::new(fs::File::create(&jsonl)?);
    let mut reports = Vec::new();
    let mut cap_hits = 0;
    for (i, cell) in spec.cells().into_iter().enumerate() {
        let records = run_cell(&kernel, &gen, cell, spec.trials, seed::derive(spec.seed, seed::TAG_CELL, i as u64))?;
        for rec in &records {
            let line = TrialLine { q: cell.q, n: cell.n, k: cell.k, r: cell.r, record: rec };
            serde_json::to_writer(&mut lines, &line)?;
            writeln!(lines)?;
        }
        let rep = cell_report(&kernel, cell, &records)?;
        cap_hits += rep.cap_hits;
        reports.push(rep);
    }
    lines.flush()?;
    write_cell_csv(&reports, BufWriter::new(fs::File::create(&csv)?))?;
    Ok(SimulateSummary { cells: reports, cap_hits, csv, jsonl })
}

/// Exact parity enumeration for the fixed configuration `spec.generator()`
/// at the first `k` and `r` of the grid.
pub fn cmd_enumerate(spec: &ExperimentSpec) -> Result<PathEnumeration> {
    spec.validate()?;
    let config = spec.generator().build()?;
    let rho = |v: Vertex| crate::rwlm::RotorSource::label(&config, v);
    enumerate_parities(&rho, spec.target, spec.k[0], spec.r[0] as f64, spec.depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let mut s = ExperimentSpec::default();
        s.apply_str("# sweep\nq = 0.4,0.6\nk=1,5\ntrials=10\n").unwrap();
        s.set("trials", "20").unwrap();
        assert_eq!(s.q, vec![0.4, 0.6]);
        assert_eq!(s.k, vec![1, 5]);
        assert_eq!(s.trials, 20);
        assert_eq!(s.cells().len(), 4);
    }

    #[test]
    fn bad_specs_rejected() {
        let mut s = ExperimentSpec::default();
        assert!(matches!(s.set("bogus", "1"), Err(Error::Usage(_))));
        assert!(s.apply_str("q").is_err());
        s.set("q", "1.5").unwrap();
        assert!(s.validate().is_err());
        s.set("q", "0.5").unwrap();
        s.set("r", "").unwrap();
        assert!(s.validate().is_err());
    }

    #[test]
    fn target_parses() {
        let mut s = ExperimentSpec::default();
        s.set("target", "-2,5").unwrap();
        assert_eq!(s.target, Vertex::new(-2, 5));
        assert!(s.set("target", "1").is_err());
    }

    #[test]
    fn zero_returns_always_reached() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = ExperimentSpec::default();
        s.apply_str("k=0\nr=5,8\ntrials=50\nn=1,2").unwrap();
        s.out = dir.path().to_path_buf();
        let out = cmd_simulate(&s).unwrap();
        assert!(out.cells.iter().all(|c| c.p_hat == 1.0));
        let text = fs::read_to_string(&out.jsonl).unwrap();
        assert_eq!(text.lines().count(), 200);
    }
}
