//! Spectral facts about `(ΣᵀΣ)⁻¹`: the top eigenvalue stays below 90% of the
//! trace, the moment bound caps it, and the off-diagonal mass is spread out.
//!
//! `cargo run --release --example eigen_bounds`

use dynreg::linalg::{symmetric_eigenvalues, DifferencePreconditioner, Preconditioner};
use dynreg::verify::{
    biased_difference_trace_inverse, frobenius_stats, verify_difference_eigen_bound, wolkowicz_upper_bound,
};

pub fn run() -> dynreg::Result<()> {
    println!("{:>6} {:>12} {:>12} {:>8} {:>12}", "T", "λ_max", "Tr", "λ/Tr", "moment bd");
    for t in [2, 8, 32, 128, 1024] {
        let r = verify_difference_eigen_bound(t)?;
        println!(
            "{t:>6} {:>12.3} {:>12.1} {:>8.4} {:>12.3}",
            r.lambda_max_inverse,
            r.trace_inverse,
            r.lambda_max_inverse / r.trace_inverse,
            r.wolkowicz_bound
        );
    }

    let a = DifferencePreconditioner::new(16).dense_inverse();
    let ev = symmetric_eigenvalues(&a)?;
    println!("T = 16: Jacobi λ_max {:.6}, moment bound {:.6}", ev[ev.len() - 1], wolkowicz_upper_bound(&a)?);

    let s = frobenius_stats(&a)?;
    println!(
        "off-diagonal ‖B‖²_F = {} vs (T/2)·max row = {} : condition {}",
        s.offdiag_frobenius_sq, s.rhs, s.holds
    );

    let v = vec![0.25; 32];
    println!(
        "Tr((ΔᵀΔ + vvᵀ)⁻¹) at T = 32 with v = 0.25·1: {:.2} (Tr((ΣᵀΣ)⁻¹) = 528)",
        biased_difference_trace_inverse(&v)?
    );
    Ok(())
}

fn main() -> dynreg::Result<()> {
    run()
}
