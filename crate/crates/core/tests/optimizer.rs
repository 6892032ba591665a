use mvcorr::correlations::{
    assemble_numeric, cyclic_w23_model, cyclic_w32_model, residual_w23, residual_w32, WitnessId, WitnessW23,
    WitnessW32,
};
use mvcorr::linalg::CMatrix;
use mvcorr::optimizer::*;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Best W32 defect at 2x2 over 50 restarts with master seed 42, default schedule.
const PINNED_W32_2X2: f64 = 2.597415367774378;

fn one() -> CMatrix {
    CMatrix::identity(1, 1)
}

#[test]
fn pinned_regression_w32_2x2() {
    let cfg = SweepConfig {
        witness: WitnessId::W32,
        dims: vec![(2, 2)],
        restarts: 50,
        master_seed: 42,
        schedule: Schedule::default(),
    };
    let out = sweep(&cfg).unwrap();
    let best = out.reports[0].best_defect;
    assert!((best - PINNED_W32_2X2).abs() <= 1e-9 * PINNED_W32_2X2, "{best:e}");
    assert_eq!(out.reports[0].best_restart, 8);
}

#[test]
fn trivial_pvms_closed_form() {
    // every observable has E_1 = 0, E_2 = I on ℂ¹, and W = e₁ᵀ: each table
    // entry is P(2,2|x,y) = e₁e₁ᵀ, so comb(x,y) = e₁e₁ᵀ and both marginal
    // differences equal e₁e₁ᵀ. ‖e₁e₁ᵀ − M₂‖² = 1 + 4·½ = 3,
    // ‖e₁e₁ᵀ − M₃‖² = 1 + 3 = 4, ‖e₁e₁ᵀ − J‖² = 0 + 1 + 1 = 2.
    let obs = || Observable {
        frame: one(),
        labels: vec![1],
        outcomes: 2,
    };
    let mut w = CMatrix::zeros(1, 3);
    w[(0, 0)] = Complex64::new(1.0, 0.0);
    let p = ModelParams {
        witness: WitnessId::W32,
        da: 1,
        db: 1,
        alice: vec![obs(), obs(), obs()],
        bob: vec![obs(), obs(), obs()],
        w,
    };
    let d = Objective::new(WitnessId::W32).unwrap().defect(&p).unwrap();
    assert!((d - 11.0).abs() < 1e-12, "{d}");
}

#[test]
fn defect_matches_cyclic_oracle() {
    let m = 8;
    let model = cyclic_w32_model(m).unwrap();
    let oracle = residual_w32(&assemble_numeric(&model).unwrap(), &WitnessW32::default()).unwrap().total_f64();
    let p = ModelParams::from_numeric_model(WitnessId::W32, &model).unwrap();
    let d = Objective::new(WitnessId::W32).unwrap().defect(&p).unwrap();
    assert!((d - oracle).abs() <= 1e-12, "{d:e} vs {oracle:e}");

    let model = cyclic_w23_model(m).unwrap();
    let oracle = residual_w23(&assemble_numeric(&model).unwrap(), WitnessW23::derived().unwrap()).unwrap().total_f64();
    let p = ModelParams::from_numeric_model(WitnessId::W23, &model).unwrap();
    let d = Objective::new(WitnessId::W23).unwrap().defect(&p).unwrap();
    assert!((d - oracle).abs() <= 1e-12, "{d:e} vs {oracle:e}");
}

#[test]
fn gradient_vanishes_at_fine_truncation() {
    let model = cyclic_w32_model(32).unwrap();
    let p = ModelParams::from_numeric_model(WitnessId::W32, &model).unwrap();
    let (f, g) = Objective::new(WitnessId::W32).unwrap().gradient(&p).unwrap();
    assert!(f < 1e-15, "{f:e}");
    assert!(g.norm() <= 1e-6, "{:e}", g.norm());
}

#[test]
fn zero_perturbation_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let obj = Objective::new(WitnessId::W23).unwrap();
    let p = ModelParams::random(WitnessId::W23, 2, 3, &mut rng);
    let za: Vec<_> = p.alice.iter().map(|o| CMatrix::zeros(o.dim(), o.dim())).collect();
    let zb: Vec<_> = p.bob.iter().map(|o| CMatrix::zeros(o.dim(), o.dim())).collect();
    let q = perturb(&p, &za, &zb, &CMatrix::zeros(p.w.nrows(), p.w.ncols()));
    assert_eq!(obj.gradient(&p).unwrap().0, obj.gradient(&q).unwrap().0);
    let (_, g1) = obj.gradient(&p).unwrap();
    let (_, g2) = obj.gradient(&q).unwrap();
    assert_eq!(g1.norm(), g2.norm());
}

#[test]
fn padding_preserves_the_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for witness in [WitnessId::W32, WitnessId::W23] {
        let obj = Objective::new(witness).unwrap();
        let p = ModelParams::random(witness, 2, 2, &mut rng);
        let q = p.padded(3, 3).unwrap();
        assert!((obj.defect(&p).unwrap() - obj.defect(&q).unwrap()).abs() <= 1e-12);
        assert!(q.pvm_deviation() <= 1e-12);
    }
    let cfg = SweepConfig {
        witness: WitnessId::W32,
        dims: vec![(2, 2), (3, 3)],
        restarts: 4,
        master_seed: 5,
        schedule: Schedule {
            max_iters: 200,
            ..Schedule::default()
        },
    };
    let out = sweep(&cfg).unwrap();
    assert!(out.reports[1].best_defect <= out.reports[0].best_defect + 1e-12);
    let padded = out.reports[1].runs.iter().find(|r| matches!(r.start, StartKind::Padded { .. })).unwrap();
    assert!((padded.initial_defect - out.reports[0].best_defect).abs() <= 1e-12);
}

#[test]
fn warm_start_reproduces_truncation() {
    let cfg = SweepConfig {
        witness: WitnessId::W32,
        dims: vec![(4, 4), (6, 6)],
        restarts: 1,
        master_seed: 1,
        schedule: Schedule {
            max_iters: 100,
            ..Schedule::default()
        },
    };
    let out = sweep(&cfg).unwrap();
    for (r, m) in out.reports.iter().zip([2, 3]) {
        let oracle = residual_w32(&assemble_numeric(&cyclic_w32_model(m).unwrap()).unwrap(), &WitnessW32::default())
            .unwrap()
            .total_f64();
        let warm = r.runs.iter().find(|x| x.start == StartKind::Cyclic { window: m }).unwrap();
        let ratio = warm.initial_defect / oracle;
        assert!((0.5..=2.0).contains(&ratio), "M = {m}: {ratio}");
        assert!(warm.defect <= warm.initial_defect);
    }
}
