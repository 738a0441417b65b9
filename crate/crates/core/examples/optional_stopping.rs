//! Mean of the stopped martingale over frozen walks, cell by cell.
//!
//! cargo run --release --example optional_stopping -- 20000
use hvlab::configs::{ConfigGenerator, ConfigKind};
use hvlab::kernel::KernelTable;
use hvlab::martingale::{verify_optional_stopping, Cell};

fn main() -> hvlab::Result<()> {
    let trials: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let r = 30;
    let kernel = KernelTable::build(r)?;
    let config = ConfigGenerator::new(ConfigKind::IudFour, 2024);
    for q in [0.4, 0.5, 1.0] {
        for n in [1, 3] {
            for k in [1, 5] {
                let rep = verify_optional_stopping(&kernel, &config, Cell { q, n, k, r }, trials, 77)?;
                println!("q={q:<4} n={n} k={k}  mean {:+.5}  se {:.5}  z {:+.2}", rep.mean, rep.stderr, rep.z);
            }
        }
    }
    Ok(())
}
