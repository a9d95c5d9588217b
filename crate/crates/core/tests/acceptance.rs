//! Acceptance gate: ten numbered criteria, one PASS/FAIL line each.
//! Exits nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dynreg::haar::{
    haar_comparator_norm_sq, haar_matrix, haar_row, timescale_path_lengths, HaarPreconditioner,
};
use dynreg::harness::{random_sequence, random_symmetric, run_experiment, ComparatorModel, LossModel, PreconditionerKind, ScenarioConfig};
use dynreg::learners::{DenseOracleReducer, FastHaarReducer, LearnerConfig, OnlineLearner, Reducer};
use dynreg::linalg::{
    difference_m_inverse_entry, difference_offdiag_frobenius_sq, difference_trace_inverse, dual_norm_sq,
    embed_comparator, embed_loss, lipschitz_bound, symmetric_eigenvalues, weighted_norm_sq, ComparatorSequence,
    DenseMatrix, DifferenceOperator, DifferencePreconditioner, IdentityPreconditioner, Preconditioner,
};
use dynreg::reduction::{
    decompose_regret, duality_gap, dynamic_regret, embedded_regret, run_online, run_reduction, run_reduction_debug,
    wealth,
};
use dynreg::verify::{
    adversary_search, biased_difference_trace_inverse, empirical_quadratic_tail, frobenius_condition,
    frobenius_stats, verify_difference_eigen_bound, wolkowicz_upper_bound, SearchMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn random_losses(rng: &mut ChaCha8Rng, rounds: usize, dim: usize, g: f64) -> Vec<Vec<f64>> {
    (0..rounds)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = norm_sq(&v).sqrt().max(1e-300);
            let r = g * rng.random_range(0.0..1.0);
            v.iter().map(|x| x * r / n).collect()
        })
        .collect()
}

fn scaled(seq: &ComparatorSequence, f: f64) -> ComparatorSequence {
    ComparatorSequence::new(seq.points().iter().map(|p| p.iter().map(|x| x * f).collect()).collect()).unwrap()
}

/// Exact integer structure of `(ΣᵀΣ)⁻¹` and `H_n`.
fn c1() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    let horizons: Vec<usize> = (1..=64).chain([128, 256, 512]).collect();
    for &t in &horizons {
        // The integer candidate times ΣᵀΣ must be the identity exactly; then
        // its integer trace must be T(T+1)/2 exactly.
        let gram = {
            let s = DifferenceOperator::new(t).dense();
            s.transpose().matmul(&s).map_err(e)?
        };
        let cand = DenseMatrix::from_fn(t, t, |i, j| (t - i.max(j)) as f64);
        let prod = gram.matmul(&cand).map_err(e)?;
        let exact_inverse = (0..t).all(|i| (0..t).all(|j| prod.get(i, j) == f64::from(u8::from(i == j))));
        let trace_exact = cand.trace() == (t * (t + 1) / 2) as f64 && difference_trace_inverse(t) == (t * (t + 1) / 2) as f64;
        let lib = DifferencePreconditioner::new(t).dense_inverse();
        let lib_exact = (0..t).all(|i| (0..t).all(|j| lib.get(i, j) == cand.get(i, j)));
        if !(exact_inverse && trace_exact && lib_exact) {
            ok = false;
            notes.push(format!("T={t}"));
        }
    }
    let mut worst = 0.0_f64;
    for t in 1..=64 {
        let numeric = DifferencePreconditioner::new(t).dense().inverse().map_err(e)?;
        for i in 0..t {
            for j in 0..t {
                let want = (t - i.max(j)) as f64;
                worst = worst.max(rel(numeric.get(i, j), want));
                ok &= difference_m_inverse_entry(i + 1, j + 1, t) == want;
            }
        }
    }
    ok &= worst <= 1e-12;
    for n in 0..=10u32 {
        let h = haar_matrix(n).map_err(e)?;
        for t in 0..(1usize << n) {
            let row = h.row(t);
            // Entries are 0 or ±1, so these sums are exact.
            let diag: f64 = row.iter().map(|x| x * x).sum();
            let support = row.iter().filter(|&&x| x != 0.0).count();
            let sparse = haar_row(t + 1, n).map_err(e)?;
            if diag != f64::from(1 + n) || support != n as usize + 1 || sparse.len() != n as usize + 1 {
                ok = false;
                notes.push(format!("n={n} row {t}"));
            }
            ok &= sparse.iter().all(|&(k, s)| h.get(t, k - 1) == s);
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(5);
    Ok((
        ok,
        format!(
            "inverse and trace exact for T in 1..64 ∪ {{128,256,512}}; numeric inverse max rel err {worst:.1e}; H_n rows exact for n ≤ 10; {:.2} s{}",
            elapsed.as_secs_f64(),
            if notes.is_empty() { String::new() } else { format!("; failures: {}", notes.join(", ")) }
        ),
    ))
}

fn c2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for &(t, d) in &[(8, 1), (8, 4), (64, 1), (64, 4)] {
        let p = DifferencePreconditioner::new(t);
        for _ in 0..50 {
            let seq = random_sequence(&mut rng, t, d);
            let got = weighted_norm_sq(&embed_comparator(&seq), &p).map_err(e)?;
            let want = norm_sq(seq.point(t)) + seq.squared_path_length();
            worst = worst.max(rel(got, want));
        }
    }
    Ok((worst <= 1e-10, format!("200 sequences, max rel err {worst:.2e}")))
}

fn c3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for &t in &[4, 16, 64, 256] {
        for _ in 0..50 {
            let d = rng.random_range(1..=3);
            let seq = random_sequence(&mut rng, t, d);
            let got = haar_comparator_norm_sq(&seq).map_err(e)?;
            let want = norm_sq(&seq.mean()) + 0.25 * timescale_path_lengths(&seq).map_err(e)?.iter().map(|p| p.1).sum::<f64>();
            worst = worst.max(rel(got, want));
        }
    }
    let p = HaarPreconditioner::new(64).map_err(e)?;
    let mut worst_loss = 0.0_f64;
    for t in 1..=64 {
        let g: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let got = dual_norm_sq(&embed_loss(t, &g, 64).map_err(e)?, &p).map_err(e)?;
        worst_loss = worst_loss.max(rel(got, 7.0 * norm_sq(&g)));
    }
    Ok((
        worst <= 1e-10 && worst_loss <= 1e-10,
        format!("norm identity max rel err {worst:.2e} over 200 sequences; loss-norm identity at T=64 max rel err {worst_loss:.2e}"),
    ))
}

fn per_round_nanos(rounds: usize, dim: usize, reps: usize) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(rounds as u64);
    let losses = random_losses(&mut rng, rounds, dim, 1.0);
    let mut best = f64::INFINITY;
    for _ in 0..reps {
        let mut l = FastHaarReducer::new(rounds, dim, LearnerConfig::default()).map_err(e)?;
        let start = Instant::now();
        let traj = run_reduction(&mut l, &losses).map_err(e)?;
        let ns = start.elapsed().as_nanos() as f64 / rounds as f64;
        std::hint::black_box(traj);
        best = best.min(ns);
    }
    Ok(best)
}

fn c4() -> Outcome {
    let mut worst = 0.0_f64;
    let mut touched_ok = true;
    for &t in &[4usize, 8, 16, 32, 64] {
        let n = t.trailing_zeros() as usize;
        for &d in &[1usize, 3] {
            for seed in 0..20u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed * 1000 + t as u64 * 10 + d as u64);
                let cfg = LearnerConfig {
                    grad_bound: rng.random_range(0.5..4.0),
                    epsilon: rng.random_range(0.1..10.0),
                };
                let mut losses = random_losses(&mut rng, t, d, cfg.grad_bound);
                if seed % 2 == 1 {
                    // Full-magnitude losses produce exactly cancelling directions.
                    for g in &mut losses {
                        let n = norm_sq(g).sqrt();
                        g.iter_mut().for_each(|x| *x *= cfg.grad_bound / n);
                    }
                }
                let mut fast = FastHaarReducer::new(t, d, cfg).map_err(e)?;
                let p = HaarPreconditioner::new(t).map_err(e)?;
                let mut oracle = DenseOracleReducer::new(&p, d, cfg).map_err(e)?;
                let mut diff = 0.0_f64;
                let mut scale = 0.0_f64;
                for g in &losses {
                    let a = fast.predict().map_err(e)?;
                    let b = oracle.predict().map_err(e)?;
                    let d2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
                    diff = diff.max(d2.sqrt());
                    scale = scale.max(norm_sq(&b).sqrt());
                    fast.update(g).map_err(e)?;
                    oracle.update(g).map_err(e)?;
                    touched_ok &= fast.touched_columns() == 1 + n;
                }
                // Relative to the trajectory's scale; rounds whose direction
                // cancels exactly leave rounding residue on one side only.
                if scale > 0.0 {
                    worst = worst.max(diff / scale);
                } else {
                    worst = worst.max(diff);
                }
            }
        }
    }
    let small = per_round_nanos(1 << 10, 4, 20)?;
    let large = per_round_nanos(1 << 14, 4, 3)?;
    let ratio = large / small;
    Ok((
        worst <= 1e-9 && touched_ok && ratio < 8.0,
        format!(
            "max play diff relative to trajectory scale {worst:.2e} over 200 runs; touched columns = 1 + log₂T: {touched_ok}; per-round {small:.0} ns at T=2^10, {large:.0} ns at T=2^14 (ratio {ratio:.2})"
        ),
    ))
}

/// Learner, its preconditioner, config, `T` and `d`.
type RandomRun = (Box<dyn OnlineLearner>, Box<dyn Preconditioner>, LearnerConfig, usize, usize);

/// A random learner of one of the three kinds.
fn random_learner(rng: &mut ChaCha8Rng) -> Result<RandomRun, String> {
    let cfg = LearnerConfig {
        grad_bound: rng.random_range(0.2..5.0),
        epsilon: rng.random_range(0.1..10.0),
    };
    let d = rng.random_range(1..=4);
    Ok(match rng.random_range(0..3) {
        0 => {
            let t = rng.random_range(2..=64);
            let l = Reducer::new(Box::new(IdentityPreconditioner::new(t)) as Box<dyn Preconditioner>, d, cfg).map_err(e)?;
            (Box::new(l), Box::new(IdentityPreconditioner::new(t)), cfg, t, d)
        }
        1 => {
            let t = rng.random_range(2..=64);
            let l = Reducer::new(Box::new(DifferencePreconditioner::new(t)) as Box<dyn Preconditioner>, d, cfg).map_err(e)?;
            (Box::new(l), Box::new(DifferencePreconditioner::new(t)), cfg, t, d)
        }
        _ => {
            let t = 1usize << rng.random_range(1..=6);
            let l = FastHaarReducer::new(t, d, cfg).map_err(e)?;
            (Box::new(l), Box::new(HaarPreconditioner::new(t).map_err(e)?), cfg, t, d)
        }
    })
}

fn c5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_eq, mut worst_gap, mut worst_wealth) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut causal = true;
    for _ in 0..100 {
        let (mut learner, p, cfg, t, d) = random_learner(&mut rng)?;
        let losses = random_losses(&mut rng, t, d, cfg.grad_bound);
        let seq = scaled(&random_sequence(&mut rng, t, d), rng.random_range(0.1..10.0));
        let traj = run_reduction_debug(learner.as_mut(), &losses).map_err(e)?;
        let full = traj.full_plays().ok_or("learner reports no full directions")?;

        // Magnitude of the summands, so cancellation does not inflate the error.
        let mag: f64 = traj
            .steps
            .iter()
            .zip(seq.points())
            .map(|(s, u)| dot(&s.loss, &s.play).abs() + dot(&s.loss, u).abs())
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        let r = dynamic_regret(&traj, &seq).map_err(e)?;
        let re = embedded_regret(&full, &traj, &seq).map_err(e)?;
        worst_eq = worst_eq.max((r - re).abs() / mag);
        worst_gap = worst_gap.max(duality_gap(&traj, &seq).map_err(e)?.abs() / mag);

        // The reduction's wealth is the scalar bettor's wealth net of its
        // initial endowment ε𝔊.
        let endowment = cfg.epsilon * lipschitz_bound(p.as_ref(), cfg.grad_bound).map_err(e)?;
        let bettor = traj.steps.last().unwrap().bettor_wealth - endowment;
        let w = wealth(&traj);
        let wmag = traj.steps.iter().map(|s| (s.beta * s.scalar_loss).abs()).sum::<f64>() + endowment;
        worst_wealth = worst_wealth.max((w - bettor).abs() / wmag);

        // Replaying a prefix and then diverging leaves the first k+1 plays
        // bit-identical.
        let k = rng.random_range(0..t);
        let mut replay = rebuild(p.as_ref(), cfg, t, d)?;
        let alt = random_losses(&mut rng, t, d, cfg.grad_bound);
        let other = run_online(replay.as_mut(), t, |s, _| if s <= k { losses[s - 1].clone() } else { alt[s - 1].clone() })
            .map_err(e)?;
        for (a, b) in traj.plays().zip(other.plays()).take(k + 1) {
            causal &= a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        }
    }
    Ok((
        worst_eq <= 1e-10 && worst_gap <= 1e-10 && worst_wealth <= 1e-10 && causal,
        format!(
            "100 runs: dynamic vs embedded regret {worst_eq:.2e}, duality gap {worst_gap:.2e}, wealth vs bettor {worst_wealth:.2e} (relative to summand magnitude); prefix replay bit-exact: {causal}"
        ),
    ))
}

/// A fresh learner of the same kind as `p`.
fn rebuild(
    p: &dyn Preconditioner,
    cfg: LearnerConfig,
    t: usize,
    d: usize,
) -> Result<Box<dyn OnlineLearner>, String> {
    Ok(match p.label() {
        "identity" => Box::new(Reducer::new(Box::new(IdentityPreconditioner::new(t)) as Box<dyn Preconditioner>, d, cfg).map_err(e)?),
        "difference" => Box::new(Reducer::new(Box::new(DifferencePreconditioner::new(t)) as Box<dyn Preconditioner>, d, cfg).map_err(e)?),
        _ => Box::new(FastHaarReducer::new(t, d, cfg).map_err(e)?),
    })
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    let mut worst_total = 0.0_f64;
    for _ in 0..50 {
        let (mut learner, p, cfg, t, d) = random_learner(&mut rng)?;
        let losses = random_losses(&mut rng, t, d, cfg.grad_bound);
        let seq = scaled(&random_sequence(&mut rng, t, d), rng.random_range(0.1..10.0));
        let traj = run_reduction_debug(learner.as_mut(), &losses).map_err(e)?;
        let dec = decompose_regret(&traj, &seq, p.as_ref()).map_err(e)?;
        let mag = dec.total.abs().max(dec.bettor_regret.abs()).max((dec.comparator_norm * dec.direction_regret).abs());
        worst = worst.max((dec.total - dec.recombined()).abs() / mag);
        worst_total = worst_total.max(rel(dec.total, dynamic_regret(&traj, &seq).map_err(e)?));
    }
    Ok((
        worst <= 1e-9 && worst_total <= 1e-9,
        format!("50 runs: recombination max rel err {worst:.2e}; total vs dynamic regret {worst_total:.2e}"),
    ))
}

fn c7() -> Outcome {
    let mut ok = true;
    let mut worst_ratio = 0.0_f64;
    for t in (2..=64).chain([256, 1024]) {
        let r = verify_difference_eigen_bound(t).map_err(e)?;
        let tr = (t * (t + 1) / 2) as f64;
        ok &= r.lambda_max_inverse <= 0.9 * tr;
        worst_ratio = worst_ratio.max(r.lambda_max_inverse / tr);
    }
    // Dense cross-check of the power iteration at moderate order.
    for t in [8, 33, 64] {
        let ev = symmetric_eigenvalues(&DifferencePreconditioner::new(t).dense_inverse()).map_err(e)?;
        let r = verify_difference_eigen_bound(t).map_err(e)?;
        ok &= rel(*ev.last().unwrap(), r.lambda_max_inverse) <= 1e-8;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_slack = f64::INFINITY;
    for &n in &[4, 16, 64] {
        for _ in 0..100 {
            let a = random_symmetric(&mut rng, n);
            let lmax = *symmetric_eigenvalues(&a).map_err(e)?.last().unwrap();
            let w = wolkowicz_upper_bound(&a).map_err(e)?;
            ok &= w >= lmax;
            min_slack = min_slack.min(w - lmax);
        }
    }
    let mut min_ratio = f64::INFINITY;
    for &t in &[8, 32, 64] {
        for _ in 0..20 {
            let v: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
            let tr = biased_difference_trace_inverse(&v).map_err(e)?;
            let floor = (t * (t + 1) / 2) as f64 / 10.0;
            ok &= tr >= floor;
            min_ratio = min_ratio.min(tr / floor);
        }
    }
    Ok((
        ok,
        format!("max λ_max/Tr = {worst_ratio:.4}; moment bound min slack {min_slack:.3e}; biased trace min ratio to floor {min_ratio:.3}"),
    ))
}

fn c8() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for &t in &[8, 12, 16] {
        let a = DifferencePreconditioner::new(t).dense_inverse();
        let out = adversary_search(&a, 1.0, 1.0, 1.0, SearchMode::Exhaustive).map_err(e)?;
        let threshold = a.trace() + a.off_diagonal().frobenius();
        let found = out.achieved_quadratic >= threshold && out.patterns_checked == 1u64 << t;
        // Recompute the witness directly.
        let g: Vec<f64> = out.signs.iter().map(|&s| f64::from(s)).collect();
        let q = a.quadratic_form(&g).map_err(e)?;
        ok &= found && out.success && q >= threshold;
        notes.push(format!("T={t}: {q:.1} ≥ {threshold:.1}"));
    }
    let a = DifferencePreconditioner::new(64).dense_inverse();
    let tail = empirical_quadratic_tail(&a, 1.0, 100_000, 8).map_err(e)?;
    let within = (tail.mean - a.trace()).abs() <= 3.0 * tail.std_error;
    ok &= within;
    notes.push(format!("MC mean {:.2} ± {:.2} vs Tr {:.0}", tail.mean, tail.std_error, a.trace()));
    Ok((ok, notes.join("; ")))
}

fn c9_config(comparator: ComparatorModel) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(4096, 1, PreconditionerKind::Haar);
    cfg.seed = 9;
    cfg.trials = 20;
    cfg.ladder = (6..=12).map(|k| 1usize << k).collect();
    cfg.baseline = false;
    cfg.loss = LossModel::Rademacher { grad_bound: 1.0 };
    cfg.comparators = vec![comparator];
    cfg
}

fn c9() -> Outcome {
    let start = Instant::now();
    // Piecewise-constant comparators set, per segment, to the best fixed
    // point in hindsight. A comparator fixed before the losses are drawn has
    // zero expected regret under symmetric losses, so its mean regret has no
    // sign and no power law to fit; that variant is reported alongside.
    let best = run_experiment(&c9_config(ComparatorModel::PiecewiseBest {
        segments: 4,
        magnitude: 1.0,
    }))
    .map_err(e)?
    .report;
    let fixed = run_experiment(&c9_config(ComparatorModel::PiecewiseConstant {
        segments: 4,
        magnitude: 1.0,
    }))
    .map_err(e)?
    .report;
    let elapsed = start.elapsed();
    let exponent = best.growth_exponent[0].ok_or("no growth exponent")?;
    let spread = best.c_spread[0].ok_or("no c spread")?;
    let cs: Vec<String> = best.rungs.iter().map(|r| format!("{:.3}", r.fitted_c[0])).collect();
    let fixed_max_c = fixed.rungs.iter().map(|r| r.fitted_c[0].abs()).fold(0.0, f64::max);
    Ok((
        exponent <= 0.75 && spread < 2.0 && elapsed < Duration::from_secs(120) && best.all_pass(),
        format!(
            "Haar, K=4: exponent {exponent:.3}, c per rung [{}], spread {spread:.3}; fixed pattern max |R_T|/bound {fixed_max_c:.3}; {:.1} s",
            cs.join(", "),
            elapsed.as_secs_f64()
        ),
    ))
}

fn c10() -> Outcome {
    let mut ok = true;
    for t in 4..=128usize {
        let inv = DifferencePreconditioner::new(t).dense_inverse();
        ok &= frobenius_condition(&inv).map_err(e)?;
        let exact = (t * t * (t * t - 1) / 6) as f64;
        ok &= frobenius_stats(&inv).map_err(e)?.offdiag_frobenius_sq == exact;
        ok &= difference_offdiag_frobenius_sq(t) == exact;
    }
    Ok((ok, "T in 4..128: spread condition holds and ‖B‖²_F = T²(T²-1)/6 exactly".into()))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("exact matrix identities", c1),
        ("squared path-length norm", c2),
        ("Haar norm decomposition", c3),
        ("fast Haar path equivalence and scaling", c4),
        ("regret equivalence, wealth duality, causality", c5),
        ("reduction decomposition", c6),
        ("eigenvalue bounds", c7),
        ("lower-bound witnesses", c8),
        ("regret growth", c9),
        ("Frobenius spread condition", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(msg) => (false, format!("error: {msg}")),
        };
        failed += usize::from(!passed);
        println!(
            "{} {:>2}. {name}: {detail} [{:.2} s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        println!("all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 10 criteria failed");
        ExitCode::FAILURE
    }
}
