mod oracle;

use margin_forge_core::{train, FeatureVector, Kernel, Label, TrainConfig};
use oracle::{Oracle, OracleKernel};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

/// A KKT tolerance of 1e-3 lets `y f(x)` drift by 1e-3 at the margin, which is
/// the same size as the decision-value bound, so comparisons run tighter.
const ORACLE_KKT_TOLERANCE: f64 = 1e-6;

struct Case {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

fn unit(rng: &mut Xoshiro256StarStar) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn random_case(rng: &mut Xoshiro256StarStar, n: usize, dim: usize) -> Case {
    loop {
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| 4.0 * unit(rng) - 2.0).collect())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|_| {
                if rng.next_u64().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        if y.iter().any(|v| *v > 0.0) && y.iter().any(|v| *v < 0.0) {
            return Case { x, y };
        }
    }
}

fn to_data(case: &Case) -> Vec<(FeatureVector, Label)> {
    case.x
        .iter()
        .zip(&case.y)
        .map(|(x, y)| (FeatureVector::from_dense(x).unwrap(), Label::from_sign(*y)))
        .collect()
}

fn compare(case: &Case, kernel: Kernel, oracle_kernel: OracleKernel, c: f64) -> (f64, f64) {
    let data = to_data(case);
    let config = TrainConfig {
        kkt_tolerance: ORACLE_KKT_TOLERANCE,
        ..TrainConfig::new(c, kernel)
    };
    let (model, diag) = train(&data, &config).unwrap();
    let oracle = Oracle::new(case.x.clone(), case.y.clone(), oracle_kernel, c);
    let sol = oracle.solve();
    let rel = (diag.dual_objective - sol.objective).abs() / sol.objective.abs().max(1e-12);
    let mut worst = 0.0f64;
    for x in &case.x {
        let f = model
            .decision_value(&FeatureVector::from_dense(x).unwrap())
            .unwrap();
        worst = worst.max((f - oracle.decision(&sol, x)).abs());
    }
    (rel, worst)
}

#[test]
fn xor_is_solved_with_rbf() {
    let case = Case {
        x: vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ],
        y: vec![-1.0, -1.0, 1.0, 1.0],
    };
    let data = to_data(&case);
    let (model, _) = train(&data, &TrainConfig::new(10.0, Kernel::Rbf { gamma: 1.0 })).unwrap();
    for (x, y) in &data {
        assert_eq!(model.predict(x).unwrap(), *y);
    }
    let oracle = Oracle::new(case.x.clone(), case.y.clone(), OracleKernel::Rbf(1.0), 10.0);
    let sol = oracle.solve();
    for (x, y) in case.x.iter().zip(&case.y) {
        assert!(oracle.decision(&sol, x) * y > 0.0);
    }
}

#[test]
fn eight_points_in_r3_linear() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(8);
    for _ in 0..5 {
        let case = random_case(&mut rng, 8, 3);
        let (rel, worst) = compare(&case, Kernel::Linear, OracleKernel::Linear, 1.0);
        assert!(rel <= 1e-4, "relative objective gap {rel}");
        assert!(worst <= 1e-3, "decision gap {worst}");
    }
}

#[test]
fn random_small_problems_match_oracle() {
    let mut rng = Xoshiro256StarStar::seed_from_u64(2024);
    for k in 0..30 {
        let n = 4 + (rng.next_u64() % 9) as usize;
        let dim = 1 + (rng.next_u64() % 4) as usize;
        let case = random_case(&mut rng, n, dim);
        let c = [0.5, 1.0, 10.0][k % 3];
        let gamma = 0.5 + unit(&mut rng);
        let (rel, worst) = if k % 2 == 0 {
            compare(&case, Kernel::Linear, OracleKernel::Linear, c)
        } else {
            compare(&case, Kernel::Rbf { gamma }, OracleKernel::Rbf(gamma), c)
        };
        assert!(rel <= 1e-4, "case {k}: relative objective gap {rel}");
        assert!(worst <= 1e-3, "case {k}: decision gap {worst}");
    }
}

#[test]
fn slack_shrinks_from_c1_to_c2_on_noisy_instance() {
    // Overlapping classes in R^2, so neither C separates them.
    let x = vec![
        vec![0.0, 0.2],
        vec![0.5, -0.3],
        vec![1.0, 1.0],
        vec![-0.2, 0.9],
        vec![0.3, 0.1],
        vec![-1.0, -0.5],
        vec![0.8, 0.4],
        vec![-0.6, 0.3],
    ];
    let y = vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
    let case = Case { x, y };
    let data = to_data(&case);
    let mut slacks = Vec::new();
    for c in [1.0, 2.0] {
        let oracle = Oracle::new(case.x.clone(), case.y.clone(), OracleKernel::Linear, c);
        let sol = oracle.solve();
        let (model, _) = train(&data, &TrainConfig::new(c, Kernel::Linear)).unwrap();
        let slack = model.total_slack(&data).unwrap();
        assert!((slack - oracle.total_slack(&sol)).abs() <= 1e-2);
        slacks.push(slack);
    }
    assert!(slacks[1] <= slacks[0] + 1e-9, "{slacks:?}");
    assert!(slacks[0] > 0.0);
}
