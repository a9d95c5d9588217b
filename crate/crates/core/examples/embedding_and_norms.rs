//! Embedding a comparator sequence into `R^{dT}` and measuring it under the
//! identity, difference and Haar geometries.
//!
//! `cargo run --example embedding_and_norms`

use dynreg::haar::{haar_comparator_norm_sq, HaarPreconditioner};
use dynreg::linalg::{
    dual_norm_sq, embed_comparator, embed_loss, weighted_norm_sq, ComparatorSequence, DifferencePreconditioner,
    IdentityPreconditioner,
};

pub fn run() -> dynreg::Result<()> {
    // Two coordinates, eight rounds, one switch halfway through.
    let points: Vec<Vec<f64>> = (0..8).map(|t| if t < 4 { vec![1.0, 0.0] } else { vec![0.0, 1.0] }).collect();
    let seq = ComparatorSequence::new(points)?;
    let u = embed_comparator(&seq);
    println!("T = {}, d = {}, embedded length {}", seq.len(), seq.dim(), u.len());
    println!("path length {:.4}, squared path length {:.4}", seq.path_length(), seq.squared_path_length());

    let identity = IdentityPreconditioner::new(8);
    let difference = DifferencePreconditioner::new(8);
    let haar = HaarPreconditioner::new(8)?;
    println!("‖ũ‖²  identity   {:.4}", weighted_norm_sq(&u, &identity)?);
    println!("‖ũ‖²  difference {:.4}  (= ‖u_T‖² + squared path length)", weighted_norm_sq(&u, &difference)?);
    println!("‖ũ‖²  haar       {:.4}  (closed form {:.4})", weighted_norm_sq(&u, &haar)?, haar_comparator_norm_sq(&seq)?);

    // The loss side pays the diagonal of S⁻¹ instead.
    let g = embed_loss(3, &[0.6, -0.8], 8)?;
    println!("‖e_3 ⊗ g‖² in the dual norm:");
    println!("  identity   {:.4}", dual_norm_sq(&g, &identity)?);
    println!("  difference {:.4}", dual_norm_sq(&g, &difference)?);
    println!("  haar       {:.4}", dual_norm_sq(&g, &haar)?);
    Ok(())
}

fn main() -> dynreg::Result<()> {
    run()
}
