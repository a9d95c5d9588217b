//! The dynamic-to-static reduction under the difference geometry: dynamic
//! regret against a switching comparator, wealth duality and the split into
//! bettor and direction regret.
//!
//! `cargo run --example dynamic_regret`

use dynreg::haar::HaarPreconditioner;
use dynreg::learners::{LearnerConfig, Reducer};
use dynreg::linalg::{weighted_norm_sq, embed_comparator, ComparatorSequence, DifferencePreconditioner};
use dynreg::reduction::{decompose_regret, duality_gap, dynamic_regret, run_reduction, run_reduction_debug, wealth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run() -> dynreg::Result<()> {
    let (t, d) = (256, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Losses pull towards +e₁ for the first half and +e₂ afterwards.
    let losses: Vec<Vec<f64>> = (0..t)
        .map(|s| {
            let noise = rng.random_range(-0.5..0.5);
            if s < t / 2 {
                vec![-0.5 + noise, 0.0]
            } else {
                vec![0.0, -0.5 + noise]
            }
        })
        .collect();
    let comparator = ComparatorSequence::new(
        (0..t)
            .map(|s| if s < t / 2 { vec![4.0, 0.0] } else { vec![0.0, 4.0] })
            .collect(),
    )?;

    let precond = DifferencePreconditioner::new(t);
    let mut learner = Reducer::new(precond.clone(), d, LearnerConfig::default())?;
    let traj = run_reduction_debug(&mut learner, &losses)?;

    let r = dynamic_regret(&traj, &comparator)?;
    println!("final play {:?}", traj.steps.last().map(|s| &s.play));
    println!("dynamic regret {r:.4}, wealth {:.4}, duality gap {:.2e}", wealth(&traj), duality_gap(&traj, &comparator)?);
    println!("‖ũ‖_M = {:.4}", weighted_norm_sq(&embed_comparator(&comparator), &precond)?.sqrt());

    let dec = decompose_regret(&traj, &comparator, &precond)?;
    println!(
        "bettor regret {:.4} + ‖ũ‖_M · direction regret {:.4} = {:.4}",
        dec.bettor_regret,
        dec.direction_regret,
        dec.recombined()
    );

    // Same losses under the Haar geometry, and the zero play for scale.
    let mut haar = Reducer::new(HaarPreconditioner::new(t)?, d, LearnerConfig::default())?;
    let haar_traj = run_reduction(&mut haar, &losses)?;
    let zero_regret: f64 = losses.iter().zip(comparator.points()).map(|(g, u)| -g[0] * u[0] - g[1] * u[1]).sum();
    println!(
        "regret: difference {r:.2}, haar {:.2}, zero play {zero_regret:.2}",
        dynamic_regret(&haar_traj, &comparator)?
    );
    Ok(())
}

fn main() -> dynreg::Result<()> {
    run()
}
