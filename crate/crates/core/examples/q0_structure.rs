//! The frozen-label walk: diagonal steps on the alternating configuration
//! and unreachable sites on uniform labels.
use hvlab::configs::{ConfigGenerator, ConfigKind};
use hvlab::sim::{alternating_increments, blocked_site_visits, box_returns, find_blocked_site};

fn main() -> hvlab::Result<()> {
    let alt = alternating_increments(1_000_000, 1);
    println!("alternating: {}/{} two-step increments diagonal, counts {:?}, max |z| {:.2}", alt.diagonal, alt.pairs, alt.counts, alt.max_abs_z);
    println!("box: {} returns in {} steps", box_returns(1_000_000, 2).returns, 1_000_000);
    for s in 0..5 {
        let config = ConfigGenerator::new(ConfigKind::IudFour, s).build()?;
        match find_blocked_site(&config, 50.0) {
            Some(site) => println!("seed {s}: blocked {site}, visits {}", blocked_site_visits(&config, site, 1_000_000, s)),
            None => println!("seed {s}: no blocked site in B_50"),
        }
    }
    Ok(())
}
