//! Exact one-step drift of the martingale at a few positions.
use hvlab::kernel::KernelTable;
use hvlab::lattice::{Label, Vertex};
use hvlab::martingale::one_step_drift;

fn main() -> hvlab::Result<()> {
    let k = KernelTable::build(24)?;
    println!("{:>8} {:>5} {:>6} {:>12}", "x", "label", "q", "drift");
    for v in [Vertex::new(0, 0), Vertex::new(1, 0), Vertex::new(3, -2), Vertex::new(-7, 11)] {
        for label in [Label::H, Label::V] {
            for q in [0.1, 0.5, 1.0] {
                println!("{:>8} {:>5} {:>6} {:>12.3e}", v.to_string(), label.to_string(), q, one_step_drift(&k, label, v, q)?);
            }
        }
    }
    Ok(())
}
