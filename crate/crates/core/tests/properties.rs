//! Invariants of the learners and the reduction over random runs.

use dynreg::haar::{haar_apply, haar_inverse_apply, haar_matrix, haar_transpose_apply, HaarPreconditioner};
use dynreg::learners::{
    DenseOracleReducer, FastHaarReducer, KtBettor, LearnerConfig, OnlineLearner, Reducer, ScalarBettor,
};
use dynreg::linalg::{
    weighted_norm_sq, ComparatorSequence, DifferencePreconditioner, IdentityPreconditioner, Preconditioner,
};
use dynreg::reduction::{
    decompose_regret, duality_gap, dynamic_regret, embedded_regret, run_online, run_reduction, run_reduction_debug,
    wealth,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
enum Kind {
    Identity,
    Difference,
    Haar,
}

fn learner(kind: Kind, t: usize, d: usize, cfg: LearnerConfig) -> (Box<dyn OnlineLearner>, Box<dyn Preconditioner>) {
    match kind {
        Kind::Identity => (
            Box::new(Reducer::new(IdentityPreconditioner::new(t), d, cfg).unwrap()),
            Box::new(IdentityPreconditioner::new(t)),
        ),
        Kind::Difference => (
            Box::new(Reducer::new(DifferencePreconditioner::new(t), d, cfg).unwrap()),
            Box::new(DifferencePreconditioner::new(t)),
        ),
        Kind::Haar => (
            Box::new(FastHaarReducer::new(t, d, cfg).unwrap()),
            Box::new(HaarPreconditioner::new(t).unwrap()),
        ),
    }
}

fn losses(seed: u64, t: usize, d: usize, g: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..t)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            v.iter().map(|x| x * g / n).collect()
        })
        .collect()
}

fn comparator(seed: u64, t: usize, d: usize, scale: f64) -> ComparatorSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    ComparatorSequence::new((0..t).map(|_| (0..d).map(|_| scale * rng.random_range(-1.0..1.0)).collect()).collect()).unwrap()
}

fn run_strategy() -> impl Strategy<Value = (Kind, usize, usize, LearnerConfig, u64)> {
    (
        prop_oneof![Just(Kind::Identity), Just(Kind::Difference), Just(Kind::Haar)],
        1u32..=6,
        1usize..=3,
        0.1f64..5.0,
        0.1f64..5.0,
        any::<u64>(),
    )
        .prop_map(|(kind, n, d, g, eps, seed)| {
            let t = match kind {
                Kind::Haar => 1usize << n,
                _ => 3 * n as usize + 1,
            };
            (kind, t, d, LearnerConfig { grad_bound: g, epsilon: eps }, seed)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn regret_equivalence_and_duality((kind, t, d, cfg, seed) in run_strategy(), scale in 0.1f64..10.0) {
        let (mut l, _) = learner(kind, t, d, cfg);
        let gs = losses(seed, t, d, cfg.grad_bound);
        let u = comparator(seed, t, d, scale);
        let traj = run_reduction_debug(l.as_mut(), &gs).unwrap();
        let r = dynamic_regret(&traj, &u).unwrap();
        let emb = embedded_regret(&traj.full_plays().unwrap(), &traj, &u).unwrap();
        let mag = cfg.grad_bound * (scale + traj.steps.iter().map(|s| s.play.iter().map(|x| x * x).sum::<f64>().sqrt()).sum::<f64>()) * t as f64;
        prop_assert!((r - emb).abs() <= 1e-10 * mag.max(1.0));
        prop_assert!(duality_gap(&traj, &u).unwrap().abs() <= 1e-10 * mag.max(1.0));
        // Wealth is never below -ε𝔊: the bettor cannot go broke.
        prop_assert!(traj.steps.iter().all(|s| s.bettor_wealth >= 0.0));
        prop_assert!(wealth(&traj).is_finite());
    }

    #[test]
    fn plays_depend_only_on_past_losses((kind, t, d, cfg, seed) in run_strategy(), cut in 0usize..64) {
        let k = cut % t;
        let gs = losses(seed, t, d, cfg.grad_bound);
        let alt = losses(seed.wrapping_add(1), t, d, cfg.grad_bound);
        let (mut a, _) = learner(kind, t, d, cfg);
        let (mut b, _) = learner(kind, t, d, cfg);
        let ta = run_reduction(a.as_mut(), &gs).unwrap();
        let tb = run_online(b.as_mut(), t, |s, _| if s <= k { gs[s - 1].clone() } else { alt[s - 1].clone() }).unwrap();
        for (x, y) in ta.plays().zip(tb.plays()).take(k + 1) {
            prop_assert_eq!(
                x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                y.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn decomposition_recombines((kind, t, d, cfg, seed) in run_strategy(), scale in 0.1f64..10.0) {
        let (mut l, p) = learner(kind, t, d, cfg);
        let gs = losses(seed, t, d, cfg.grad_bound);
        let u = comparator(seed, t, d, scale);
        let traj = run_reduction_debug(l.as_mut(), &gs).unwrap();
        let dec = decompose_regret(&traj, &u, p.as_ref()).unwrap();
        let mag = dec.bettor_regret.abs().max((dec.comparator_norm * dec.direction_regret).abs()).max(1.0);
        prop_assert!((dec.total - dec.recombined()).abs() <= 1e-9 * mag);
        prop_assert!((dec.total - dynamic_regret(&traj, &u).unwrap()).abs() <= 1e-9 * mag);
    }

    #[test]
    fn directions_stay_in_the_unit_ball((kind, t, d, cfg, seed) in run_strategy()) {
        let (mut l, p) = learner(kind, t, d, cfg);
        for g in losses(seed, t, d, cfg.grad_bound) {
            l.predict().unwrap();
            let v = l.full_direction().unwrap();
            prop_assert!(weighted_norm_sq(&v, p.as_ref()).unwrap() <= 1.0 + 1e-9);
            l.update(&g).unwrap();
        }
    }

    #[test]
    fn fast_haar_matches_dense_oracle(n in 0u32..=6, d in 1usize..=3, g in 0.1f64..5.0, eps in 0.1f64..5.0, seed in any::<u64>()) {
        let t = 1usize << n;
        let cfg = LearnerConfig { grad_bound: g, epsilon: eps };
        let gs = losses(seed, t, d, g);
        let mut fast = FastHaarReducer::new(t, d, cfg).unwrap();
        let p = HaarPreconditioner::new(t).unwrap();
        let mut oracle = DenseOracleReducer::new(&p, d, cfg).unwrap();
        let a = run_reduction(&mut fast, &gs).unwrap();
        let b = run_reduction(&mut oracle, &gs).unwrap();
        // Relative to the trajectory's scale: rounds where the direction
        // cancels exactly leave rounding residue on one side only.
        let scale = b.plays().map(|w| w.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
        for (x, y) in a.plays().zip(b.plays()) {
            let diff = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            prop_assert!(diff <= 1e-9 * scale);
        }
        prop_assert_eq!(fast.touched_columns(), 1 + n as usize);
    }

    #[test]
    fn haar_transforms_invert(n in 0u32..=8, seed in any::<u64>()) {
        let t = 1usize << n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..t).map(|_| rng.random_range(-3.0..3.0)).collect();
        let back = haar_apply(&haar_inverse_apply(&v).unwrap()).unwrap();
        for (a, b) in v.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * 3.0 * t as f64);
        }
        if n <= 6 {
            let dense = haar_matrix(n).unwrap().transpose().matvec(&v).unwrap();
            let fast = haar_transpose_apply(&v).unwrap();
            for (a, b) in dense.iter().zip(&fast) {
                prop_assert!((a - b).abs() <= 1e-12 * 3.0 * t as f64);
            }
        }
    }

    #[test]
    fn kt_wealth_stays_positive(losses in prop::collection::vec(-3.0f64..3.0, 1..300), eps in 0.01f64..10.0, g in 0.1f64..3.0) {
        let mut b = KtBettor::new(eps, g).unwrap();
        for c in losses {
            let before = b.wealth();
            let bet = b.bet();
            prop_assert!(bet.abs() <= before / g + 1e-12 * before);
            b.observe(c);
            prop_assert!(b.wealth() > 0.0);
        }
    }
}

#[test]
fn zero_losses_give_zero_plays() {
    for kind in [Kind::Identity, Kind::Difference, Kind::Haar] {
        let (mut l, _) = learner(kind, 16, 2, LearnerConfig::default());
        let traj = run_reduction(l.as_mut(), &vec![vec![0.0, 0.0]; 16]).unwrap();
        assert!(traj.plays().all(|w| w.iter().all(|&x| x == 0.0)), "{kind:?}");
    }
}

#[test]
fn horizon_and_shape_errors() {
    let mut l = FastHaarReducer::new(2, 1, LearnerConfig::default()).unwrap();
    assert!(l.update(&[1.0]).is_err(), "update before predict");
    l.step(&[1.0]).unwrap();
    assert!(l.step(&[1.0, 2.0]).is_err(), "wrong dimension");
    l.step(&[-1.0]).unwrap();
    assert!(matches!(l.predict(), Err(dynreg::Error::HorizonExceeded { horizon: 2 })));
    assert!(FastHaarReducer::new(12, 1, LearnerConfig::default()).is_err());
}
