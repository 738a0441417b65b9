//! Window label statistics seen from the walker, against spanning-tree
//! samples.
use hvlab::sim::{cmd_stationarity_probe, ExperimentSpec};

fn main() -> hvlab::Result<()> {
    let mut spec = ExperimentSpec::default();
    spec.apply_str("q=1\ntrials=400\nsteps=1000\nustp-radius=40\nwindow=2")?;
    spec.out = std::env::temp_dir().join("hvlab-stationarity.json");
    let (report, path) = cmd_stationarity_probe(&spec)?;
    for w in &report.windows {
        for s in &w.starts {
            let tv: Vec<String> = s.tv.iter().map(|x| format!("{x:.3}")).collect();
            println!("{} from {:<5} tv at {:?}: {}", w.shape, s.start, report.checkpoints, tv.join(" "));
        }
    }
    println!("{}", path.display());
    Ok(())
}
