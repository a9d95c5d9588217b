//! Sign-pattern adversaries: exhaustive search for a Rademacher-style loss
//! sequence whose embedded sum is large in `A = (ΣᵀΣ)⁻¹`, and the sampled
//! distribution of that quadratic.
//!
//! `cargo run --release --example lower_bound_adversary`

use dynreg::linalg::{DifferencePreconditioner, Preconditioner};
use dynreg::verify::{adversary_search, empirical_quadratic_tail, SearchMode};

pub fn run() -> dynreg::Result<()> {
    for t in [8, 12, 16] {
        let a = DifferencePreconditioner::new(t).dense_inverse();
        let out = adversary_search(&a, 1.0, 4.0, 1.0, SearchMode::Exhaustive)?;
        let signs: String = out.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
        println!(
            "T = {t:>2}: best {signs:<16} ‖ΣG̃‖²_A = {:>8.1} (threshold {:>6.1}), zero-play regret vs ‖ũ‖ = 2 comparator {:.2}",
            out.achieved_quadratic, out.threshold, out.regret_lower_value
        );
    }

    let a = DifferencePreconditioner::new(64).dense_inverse();
    let sampled = adversary_search(&a, 1.0, 1.0, 2.0, SearchMode::Sampled { trials: 20_000, seed: 3 })?;
    println!("T = 64 sampled: {:.2}% of patterns clear q = 2", 100.0 * sampled.success_fraction);

    let tail = empirical_quadratic_tail(&a, 1.0, 50_000, 5)?;
    println!("mean {:.1} ± {:.1} vs Tr(A) = {}", tail.mean, tail.std_error, tail.expected);
    for (p, q) in &tail.quantiles {
        println!("  quantile {p:.2}: {q:.1}");
    }
    Ok(())
}

fn main() -> dynreg::Result<()> {
    run()
}
