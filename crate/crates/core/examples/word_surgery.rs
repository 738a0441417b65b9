//! Loop construction through x and the surgery map on enumerated words.
//!
//! cargo run --release --example word_surgery -- 24
use hvlab::configs::{ConfigGenerator, ConfigKind};
use hvlab::lattice::Vertex;
use hvlab::paths::{check_phi, collect_j1, find_word_lemma2, phi, LocalLabels};
use hvlab::rwlm::RotorSource;

fn main() -> hvlab::Result<()> {
    let depth: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let config = ConfigGenerator::new(ConfigKind::IudHv, 7).build()?;
    let rho = |v: Vertex| config.label(v);
    let x = Vertex::new(3, 1);

    let y = x + Vertex::new(-2, 2);
    let loop_word = find_word_lemma2(y, LocalLabels::from_fn(x, rho), x)?;
    let shown: Vec<String> = loop_word.word.iter().map(|v| v.to_string()).collect();
    println!("loop from {y} (stages {:?}): {}", loop_word.stages, shown.join(" "));

    let words = collect_j1(&rho, x, 1, 7.0, depth)?;
    println!("{} terminal words of length <= {depth} visit {x}", words.len());
    if let Some(w) = words.first() {
        println!("shortest-first example: {} -> {} steps", w.len(), phi(w, &rho, x, 1, 7.0)?.len());
    }
    let report = check_phi(&words, &rho, x, 1, 7.0)?;
    println!("{report:?}");
    Ok(())
}
