//! Sample a spanning-tree configuration and draw it, with the box and line
//! configurations for comparison.
use std::fs;

use hvlab::configs::{render_arrows, ConfigGenerator, ConfigKind, UstpConfig};

fn main() -> hvlab::Result<()> {
    let u = UstpConfig::sample(12, 4)?;
    assert!(u.is_oriented_spanning_tree());
    fs::write("ustp.svg", render_arrows(&u, 12, 16.0))?;
    for kind in [ConfigKind::Box, ConfigKind::Line, ConfigKind::Alternating] {
        let c = ConfigGenerator::new(kind, 0).build()?;
        fs::write(format!("{kind}.svg"), render_arrows(&c, 12, 16.0))?;
    }
    println!("wrote ustp.svg, box.svg, line.svg, alternating.svg");
    Ok(())
}
