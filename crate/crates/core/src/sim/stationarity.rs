use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{output_file, write_json, ExperimentSpec};
use crate::configs::{Config, ConfigKind, UstpConfig};
use crate::error::Result;
use crate::lattice::{Label, Vertex, ORIGIN};
use crate::rwlm::{FreeWalk, LocalMechanism, RotorSource};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartSeries {
    pub start: String,
    /// Total variation distance to the reference at each checkpoint.
    pub tv: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub shape: String,
    pub starts: Vec<StartSeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub radius: u32,
    pub q: f64,
    pub trials: u64,
    pub checkpoints: Vec<u64>,
    pub windows: Vec<WindowReport>,
}

/// Label pattern of the `side × side` square with lower-left corner `at`.
fn pattern(side: usize, at: Vertex, label: &mut dyn FnMut(Vertex) -> Label) -> usize {
    let mut code = 0;
    for j in 0..side as i32 {
        for i in 0..side as i32 {
            code = code << 1 | (label(at + Vertex::new(i, j)) == Label::V) as usize;
        }
    }
    code
}

fn tv(a: &[usize], b: &[usize], cells: usize) -> f64 {
    let mut ca = vec![0f64; 1 << cells];
    let mut cb = vec![0f64; 1 << cells];
    a.iter().for_each(|&p| ca[p] += 1.0 / a.len() as f64);
    b.iter().for_each(|&p| cb[p] += 1.0 / b.len() as f64);
    0.5 * ca.iter().zip(&cb).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Checkpoints 10, 100, ... below `steps`, then `steps`.
fn checkpoints(steps: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(10u64), |t| t.checked_mul(10)).take_while(|&t| t < steps).collect();
    out.push(steps);
    out
}

/// Compare the labels seen from the walker at several times against
/// spanning-tree samples around the origin, for walks started from a
/// spanning-tree configuration and from uniform labels. Outside the sampled
/// tree the configuration falls back to uniform labels, so late checkpoints
/// of long walks mix the two.
pub fn cmd_stationarity_probe(spec: &ExperimentSpec) -> Result<(StationarityReport, PathBuf)> {
    spec.validate()?;
    let radius = spec.ustp_radius;
    let q = spec.q[0];
    let mech = LocalMechanism::hv(q)?;
    let sides: Vec<usize> = (1..=spec.window).collect();
    let cps = checkpoints(spec.steps);
    UstpConfig::sample(radius, spec.seed)?;

    let reference: Vec<Vec<usize>> = (0..spec.trials)
        .into_par_iter()
        .map(|i| {
            let u = UstpConfig::sample(radius, seed::derive(spec.seed, seed::TAG_REFERENCE, i)).expect("validated");
            sides.iter().map(|&s| pattern(s, ORIGIN, &mut |v| u.label(v))).collect()
        })
        .collect();

    let run = |start: ConfigKind| -> Vec<Vec<Vec<usize>>> {
        (0..spec.trials)
            .into_par_iter()
            .map(|i| {
                let s = seed::derive(spec.seed, seed::TAG_CONFIG, i);
                let env = match start {
                    ConfigKind::Ustp => Config::Ustp(UstpConfig::sample(radius, s).expect("validated")),
                    kind => Config::Lazy { kind, seed: s },
                };
                let mut walk = FreeWalk::new(&env, mech.clone(), radius as i32 + 2);
                let mut rng = seed::rng(seed::derive(spec.seed, seed::TAG_WALK, i));
                let mut t = 0;
                cps.iter()
                    .map(|&cp| {
                        while t < cp {
                            walk.step(&mut rng);
                            t += 1;
                        }
                        let at = walk.position();
                        sides.iter().map(|&s| pattern(s, at, &mut |v| walk.rotor(v).label())).collect()
                    })
                    .collect()
            })
            .collect()
    };
    let starts = [("ustp", run(ConfigKind::Ustp)), ("iud", run(ConfigKind::IudFour))];

    let windows = sides
        .iter()
        .enumerate()
        .map(|(w, &side)| {
            let reference: Vec<usize> = reference.iter().map(|r| r[w]).collect();
            WindowReport {
                shape: format!("{side}x{side}"),
                starts: starts
                    .iter()
                    .map(|(name, runs)| StartSeries {
                        start: name.to_string(),
                        tv: (0..cps.len())
                            .map(|c| {
                                let seen: Vec<usize> = runs.iter().map(|r| r[c][w]).collect();
                                tv(&seen, &reference, side * side)
                            })
                            .collect(),
                    })
                    .collect(),
            }
        })
        .collect();
    let report = StationarityReport { radius, q, trials: spec.trials, checkpoints: cps, windows };
    let path = output_file(spec, "stationarity.json")?;
    write_json(&report, &path)?;
    Ok((report, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_grid() {
        assert_eq!(checkpoints(1000), vec![10, 100, 1000]);
        assert_eq!(checkpoints(5), vec![5]);
        assert_eq!(checkpoints(250), vec![10, 100, 250]);
    }

    #[test]
    fn tv_bounds() {
        assert_eq!(tv(&[0, 1], &[0, 1], 1), 0.0);
        assert_eq!(tv(&[0, 0], &[1, 1], 1), 1.0);
    }

    #[test]
    fn one_report_per_shape() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = ExperimentSpec::default();
        spec.apply_str("trials=20\nsteps=50\nustp-radius=8\nwindow=3").unwrap();
        spec.out = dir.path().to_path_buf();
        let (rep, path) = cmd_stationarity_probe(&spec).unwrap();
        assert_eq!(rep.windows.len(), 3);
        assert!(rep.windows.iter().all(|w| w.starts.len() == 2 && w.starts[0].tv.len() == 2));
        assert!(path.exists());
    }
}
