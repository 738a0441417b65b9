//! First-visit renders of the four single-walker presets.
//!
//! cargo run --release --example figure1_render -- 10000
use std::fs;

use hvlab::configs::{ConfigGenerator, ConfigKind};
use hvlab::seed;
use hvlab::sim::{first_visit_edges, render_svg, RenderPreset};

fn main() -> hvlab::Result<()> {
    let steps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let config = ConfigGenerator::new(ConfigKind::IudFour, 1).build()?;
    for preset in RenderPreset::ALL {
        let edges = first_visit_edges(&config, preset.mechanism(), steps, seed::derive(1, seed::TAG_WALK, 0));
        let path = format!("{}.svg", preset.name());
        fs::write(&path, render_svg(&edges, steps))?;
        println!("{path}: {} distinct edges", edges.len());
    }
    Ok(())
}
