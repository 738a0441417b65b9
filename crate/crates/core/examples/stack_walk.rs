//! A three-walker stack walk on Z^2 and its replay by popping operations.
use hvlab::lattice::ORIGIN;
use hvlab::stack::{continuation, SeededLatticeRule, Stack, StackWalk, TurnOrder};

fn main() {
    let rule = SeededLatticeRule { seed: 42 };
    let order = TurnOrder::cyclic(3);
    let mut walk = StackWalk::new(vec![ORIGIN; 3], Stack::new(rule));
    let mut replay = (vec![ORIGIN; 3], Stack::new(rule));
    for t in 1..=12 {
        let i = order.at(t) - 1;
        let to = walk.step(i);
        let (next, stack) = continuation(replay.0[i], &replay.1);
        replay.0[i] = next;
        replay.1 = stack;
        println!("t={t:>2} walker {} -> {to}  (replay {next})", i + 1);
    }
    println!("origin visited {} times", walk.visits(ORIGIN));
}
