//! The `O(d log T)` Haar learner tracking a drifting target online, against
//! the learner that always plays zero.
//!
//! `cargo run --release --example haar_tracking`

use dynreg::harness::tracking_loss;
use dynreg::learners::{FastHaarReducer, LearnerConfig, ZeroLearner};
use dynreg::linalg::ComparatorSequence;
use dynreg::reduction::{dynamic_regret, run_online};

pub fn run() -> dynreg::Result<()> {
    let (t, d) = (4096, 3);
    let target: Vec<Vec<f64>> = (0..t)
        .map(|s| {
            let phase = s as f64 / 512.0;
            vec![phase.sin(), phase.cos(), if s < t / 2 { 1.0 } else { -1.0 }]
        })
        .collect();
    let comparator = ComparatorSequence::new(target.clone())?;
    let g = 1.0;
    let loss = |s: usize, w: &[f64]| tracking_loss(w, &target[s - 1], g);

    let mut fast = FastHaarReducer::new(t, d, LearnerConfig { grad_bound: g, epsilon: 1.0 })?;
    let traj = run_online(&mut fast, t, loss)?;
    let mut zero = ZeroLearner::new(d, t);
    let base = run_online(&mut zero, t, loss)?;

    println!("columns of Λ touched per round: {}", fast.touched_columns());
    println!("regret vs target: haar {:.2}, zero play {:.2}", dynamic_regret(&traj, &comparator)?, dynamic_regret(&base, &comparator)?);
    for s in [1, 512, 1024, 2048, 3072, 4096] {
        let w = &traj.steps[s - 1].play;
        let u = &target[s - 1];
        println!("t = {s:>4}: w = [{:+.3}, {:+.3}, {:+.3}]  target [{:+.3}, {:+.3}, {:+.3}]", w[0], w[1], w[2], u[0], u[1], u[2]);
    }
    Ok(())
}

fn main() -> dynreg::Result<()> {
    run()
}
