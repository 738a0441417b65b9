//! E|X_t|^2 / t for the H-V walk from uniform labels.
use hvlab::configs::{ConfigGenerator, ConfigKind};
use hvlab::rwlm::LocalMechanism;
use hvlab::sim::mean_square_displacement;

fn main() -> hvlab::Result<()> {
    let config = ConfigGenerator::new(ConfigKind::IudFour, 10);
    for q in [0.25, 0.5, 1.0] {
        let m = mean_square_displacement(LocalMechanism::hv(q)?, &config, 2_000, 2_000, 3)?;
        println!("q={q:<4} E|X_t|^2/t = {:.4} ± {:.4}", m.ratio, m.stderr);
    }
    Ok(())
}
