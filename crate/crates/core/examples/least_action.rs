//! Turn-order invariance of absorption on random finite sink instances.
use hvlab::seed;
use hvlab::stack::{check_monotonicity, FiniteSinkInstance, TurnOrder};

fn main() -> hvlab::Result<()> {
    let mut rng = seed::rng(3);
    for i in 0..5 {
        let inst = FiniteSinkInstance::random(&mut rng);
        let n = inst.walkers.len();
        let base = inst.run_to_absorption(&TurnOrder::cyclic(n))?;
        let random = inst.run_to_absorption(&TurnOrder::Random { n, seed: i })?;
        let reversed = inst.run_to_absorption(&TurnOrder::CycleOver((1..=n).rev().collect()))?;
        let lazy = TurnOrder::CycleOver(vec![1; 3]);
        let mono = check_monotonicity(&inst, &lazy, &TurnOrder::cyclic(n), 500)?;
        println!(
            "instance {i}: {} vertices, {n} walkers, {} moves; orders agree: {}; monotone: {}",
            inst.graph.len(),
            base.total_moves,
            base == random && base == reversed,
            mono.holds()
        );
        println!("  sinks {:?}", base.final_positions);
    }
    Ok(())
}
