//! Return probabilities against the finite-radius lower bound, as CSV.
use hvlab::configs::{ConfigGenerator, ConfigKind};
use hvlab::kernel::KernelTable;
use hvlab::martingale::{bound_iud, bound_many_walkers, cell_report, run_cell, write_cell_csv, Cell};

fn main() -> hvlab::Result<()> {
    let kernel = KernelTable::build(100)?;
    let config = ConfigGenerator::new(ConfigKind::IudFour, 5);
    let cells = [
        Cell { q: 0.5, n: 1, k: 1, r: 30 },
        Cell { q: 1.0, n: 3, k: 1, r: 30 },
        Cell { q: 0.4, n: 3, k: 1, r: 30 },
        Cell { q: 1.0, n: 3, k: 3, r: 100 },
    ];
    let mut reports = Vec::new();
    for (i, cell) in cells.into_iter().enumerate() {
        let records = run_cell(&kernel, &config, cell, 5_000, i as u64)?;
        reports.push(cell_report(&kernel, cell, &records)?);
    }
    write_cell_csv(&reports, std::io::stdout())?;
    for c in &cells {
        println!("# limits q={} n={}: many walkers {:.4}, iud {:.4}", c.q, c.n, bound_many_walkers(c.q, c.n), bound_iud(c.q, c.n));
    }
    Ok(())
}
