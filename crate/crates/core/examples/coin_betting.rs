//! The one-dimensional KT bettor on its own: wealth grows on a biased coin
//! and decays slowly on an alternating one.
//!
//! `cargo run --example coin_betting`

use dynreg::learners::{KtBettor, ScalarBettor};

fn play(bettor: &mut KtBettor, losses: impl Iterator<Item = f64>) -> f64 {
    let mut reward = 0.0;
    for c in losses {
        reward -= c * bettor.bet();
        bettor.observe(c);
    }
    reward
}

pub fn run() -> dynreg::Result<()> {
    let mut biased = KtBettor::new(1.0, 1.0)?;
    let r = play(&mut biased, (0..200).map(|t| if t % 4 == 3 { 1.0 } else { -1.0 }));
    println!("biased coin, 200 rounds: wealth {:.3e}, reward {r:.3e}", biased.wealth());

    let mut alternating = KtBettor::new(1.0, 1.0)?;
    play(&mut alternating, (0..1000).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }));
    println!(
        "alternating coin, 1000 rounds: wealth {:.6} (never below ε𝔊/(2√500) = {:.6})",
        alternating.wealth(),
        1.0 / (2.0 * 500f64.sqrt())
    );

    let mut clipped = KtBettor::new(0.5, 2.0)?;
    play(&mut clipped, [3.0, -5.0, 1.0].into_iter());
    println!("losses beyond 𝔊 = 2 clipped: {}", clipped.clipped());
    Ok(())
}

fn main() -> dynreg::Result<()> {
    run()
}
