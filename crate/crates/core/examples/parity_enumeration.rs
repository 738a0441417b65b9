//! Exact parity masses of visits to x against Monte Carlo.
//!
//! cargo run --release --example parity_enumeration -- 26
use hvlab::configs::{ConfigGenerator, ConfigKind};
use hvlab::lattice::Vertex;
use hvlab::paths::{enumerate_parities, mc_parities};
use hvlab::rwlm::RotorSource;

fn main() -> hvlab::Result<()> {
    let depth: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(24);
    let config = ConfigGenerator::new(ConfigKind::IudHv, 7).build()?;
    let rho = |v: Vertex| config.label(v);
    let x = Vertex::new(3, 1);
    let e = enumerate_parities(&rho, x, 1, 7.0, depth)?;
    println!("{}", serde_json::to_string_pretty(&e)?);
    let (lo, hi) = e.ratio_bracket();
    println!("p_even / p_odd in [{lo:.4}, {hi:.4}]");
    let mc = mc_parities(&rho, x, 1, 7.0, 200_000, 1)?;
    println!("mc: even {:.4} ± {:.4}, odd {:.4} ± {:.4}, zero {:.4}", mc.p_even, mc.se_even, mc.p_odd, mc.se_odd, mc.p_zero);
    Ok(())
}
