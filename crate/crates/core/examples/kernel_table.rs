//! Potential kernel table: residual, known values, weight sums.
//!
//! cargo run --release --example kernel_table -- 60 kernel.csv
use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use hvlab::kernel::{kernel_asymptotic, KernelTable};
use hvlab::lattice::Vertex;

fn main() -> hvlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let radius: u32 = args.next().and_then(|s| s.parse().ok()).unwrap_or(60);
    let t = Instant::now();
    let k = KernelTable::build(radius)?;
    println!("radius {radius}: {} sweeps, {:.2?}", k.sweeps(), t.elapsed());
    println!("max interior residual {:.3e}", k.max_interior_residual());
    println!("a(1,0) = {:.10}", k.value(Vertex::new(1, 0))?);
    println!("a(1,1) = {:.10}  (4/pi = {:.10})", k.value(Vertex::new(1, 1))?, 4.0 / PI);
    for x in [10, 20, 40] {
        let v = Vertex::new(x, 3);
        if k.contains(v) {
            println!("a{v} - asymptotic = {:+.3e}", k.value(v)? - kernel_asymptotic(v)?);
        }
    }
    let mut r = 4;
    while 2 * r + 1 <= radius {
        println!(
            "r={r:>3}  iud sum {:.12}  ball sum {:.6}  doubling gain {:.6}",
            k.iud_weight_sum(r)?,
            k.weight_ball_sum(r)?,
            k.weight_ball_sum(2 * r)? - k.weight_ball_sum(r)?
        );
        r *= 2;
    }
    println!("(2/pi) ln 2 = {:.6}", 2.0 / PI * 2f64.ln());
    if let Some(path) = args.next() {
        k.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
