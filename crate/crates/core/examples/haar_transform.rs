//! The Haar basis: dense matrix, `O(T)` transforms, sparse rows and the
//! timescale decomposition of a comparator.
//!
//! `cargo run --example haar_transform`

use dynreg::haar::{
    haar_apply, haar_matrix, haar_row, haar_transpose_apply, timescale_path_lengths, HaarBasis,
};
use dynreg::linalg::ComparatorSequence;

pub fn run() -> dynreg::Result<()> {
    let n = 3;
    let h = haar_matrix(n)?;
    println!("H_{n}:");
    for i in 0..h.rows() {
        let row: Vec<String> = h.row(i).iter().map(|x| format!("{x:>3}")).collect();
        println!("  [{}]", row.join(" "));
    }

    let v: Vec<f64> = (1..=8).map(f64::from).collect();
    let fast = haar_transpose_apply(&v)?;
    let dense = h.transpose().matvec(&v)?;
    println!("Hᵀv fast  {fast:?}");
    println!("Hᵀv dense {dense:?}");
    println!("H(Hᵀv)    {:?}", haar_apply(&fast)?);

    // Every row touches 1 + n columns: this is what keeps updates logarithmic.
    let basis = HaarBasis::for_horizon(1 << 10)?;
    let row = haar_row(777, basis.order())?;
    println!("row 777 of H_10 has {} nonzeros: {row:?}", row.len());

    let seq = ComparatorSequence::from_scalars(&[0.0, 0.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0])?;
    for (tau, p) in timescale_path_lengths(&seq)? {
        println!("P̄(ũ, {tau}) = {p:.4}");
    }
    Ok(())
}

fn main() -> dynreg::Result<()> {
    run()
}
