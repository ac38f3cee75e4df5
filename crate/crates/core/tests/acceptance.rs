//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robustq::budget::{lambda_of_x, x_of_lambda, BudgetCurve};
use robustq::distributions::normal;
use robustq::oracle::{
    coupling_j_alpha, direct_solve, rearrangement_extremes, step_quantile, CouplingProblem, DirectProblem,
};
use robustq::{
    default_rho_grid, profile, Claim, DiscreteDistribution, Discretization, LognormalKernel, RobustObjective,
    SolveResult, SolveSettings, SolverGrid, UtilitySpec,
};

type Outcome = Result<String, String>;

fn kernel() -> LognormalKernel {
    LognormalKernel::new(0.02, 0.25, 1.0).unwrap()
}

fn objective(alpha: f64, claim: Claim, c: &[f64], gamma: &[f64]) -> RobustObjective {
    RobustObjective::new(alpha, claim, UtilitySpec::new(c.to_vec(), gamma.to_vec()).unwrap()).unwrap()
}

/// Default investor of the θ and endowment studies.
fn baseline() -> RobustObjective {
    objective(0.25, Claim::uniform(2.0).unwrap(), &[950.0, 950.0], &[0.010, 0.012])
}

/// The five parameter sets of the numerical study with their endowments.
fn study_sets() -> Vec<(&'static str, RobustObjective, f64)> {
    vec![
        ("theta study", baseline(), 7.66),
        ("gamma study", objective(0.25, Claim::uniform(8.0).unwrap(), &[950.0, 950.0], &[0.010, 0.012]), 6.26),
        ("c study", objective(0.25, Claim::uniform(10.0).unwrap(), &[950.0, 950.0], &[0.010, 0.018]), 9.72),
        ("alpha study", objective(0.25, Claim::uniform(20.0).unwrap(), &[200.0, 3600.0], &[0.0008, 0.08]), 15.17),
        (
            "claim study",
            objective(0.6, Claim::truncated_normal(1.0, 0.5, 0.0, 2.0).unwrap(), &[0.5, 0.5], &[1.0, 2.0]),
            0.17,
        ),
    ]
}

struct RandomCase {
    objective: RobustObjective,
    x: f64,
}

fn random_cases() -> Vec<RandomCase> {
    (0..20u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let alpha = rng.random_range(0.0..=1.0);
            let c = [rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)];
            let gamma = [rng.random_range(0.3..2.0), rng.random_range(0.3..2.0)];
            let y = rng.random_range(0.5..3.0);
            let x = rng.random_range(1.0..5.0);
            RandomCase { objective: objective(alpha, Claim::uniform(y).unwrap(), &c, &gamma), x }
        })
        .collect()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let k = kernel();
    let gamma = 1.0;
    let obj = objective(0.0, Claim::constant(0.0).unwrap(), &[1.0], &[gamma]);
    let settings = SolveSettings::default();
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for &lambda in &[0.3, 0.7, 1.0, 2.0] {
        let start = Instant::now();
        let res = robustq::solve(&obj, &k, lambda, &settings).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        for i in 1..res.p.len() - 1 {
            let rho = k.quantile(1.0 - res.p[i]).unwrap();
            let exact = ((gamma.ln() - f64::ln(lambda) - rho.ln()) / gamma).max(0.0);
            worst = worst.max((res.q[i] - exact).abs());
        }
    }
    let detail = format!("sup error {worst:.2e} (tol 1e-4), slowest solve {slowest:.3}s at N={}", settings.grid.len());
    if worst < 1e-4 && slowest < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2() -> Outcome {
    let k = kernel();
    let start = Instant::now();
    let grid = SolverGrid::with_points(400).unwrap();
    let settings = SolveSettings::default().with_grid(grid);
    let (mut worst_obj, mut worst_q) = (0.0f64, 0.0f64);
    for case in random_cases() {
        let vi = lambda_of_x(&case.objective, &k, case.x, &settings).map_err(|e| e.to_string())?.result;
        let disc = Discretization::new(&case.objective, &k, vi.grid);
        let vi_value = disc.objective_of(&vi.q);
        let direct = direct_solve(&DirectProblem {
            objective: case.objective.clone(),
            kernel: k,
            budget: case.x,
            grid_points: grid.len(),
        })
        .map_err(|e| e.to_string())?;
        worst_obj = worst_obj.max((direct.objective - vi_value).abs() / vi_value.abs());
        let away =
            vi.p.iter()
                .zip(vi.q.iter().zip(direct.quantile.values()))
                .filter(|(&p, _)| (p - vi.pbar).abs() > 0.02)
                .map(|(_, (a, b))| (a - b).abs())
                .fold(0.0, f64::max);
        worst_q = worst_q.max(away);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!(
        "20 cases: objective rel diff {worst_obj:.2e} (tol 1e-3), quantile sup diff {worst_q:.2e} (tol 1e-2), {elapsed:.1}s"
    );
    if worst_obj < 1e-3 && worst_q < 1e-2 && elapsed < 60.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kkt_failure(res: &SolveResult) -> Option<String> {
    let r = &res.residuals;
    let ok = r.min_gap >= -1e-6 && r.complementarity <= 1e-6 && r.ode <= 1e-5 && r.zero_region == 0.0;
    let zeros_exact = res.p.iter().zip(&res.q).all(|(&p, &q)| p > res.pbar || q == 0.0);
    (!(ok && zeros_exact)).then(|| r.to_string())
}

fn criterion_3() -> Outcome {
    let k = kernel();
    let settings = SolveSettings::default();
    let mut solves = 0;
    let mut check = |res: &SolveResult, label: &str| -> Result<(), String> {
        solves += 1;
        match kkt_failure(res) {
            Some(msg) => Err(format!("{label}: {msg}")),
            None => Ok(()),
        }
    };
    for (name, obj, x) in study_sets() {
        let sol = lambda_of_x(&obj, &k, x, &settings).map_err(|e| format!("{name}: {e}"))?;
        check(&sol.result, name)?;
        for scale in [0.5, 2.0] {
            let res = robustq::solve(&obj, &k, sol.lambda * scale, &settings).map_err(|e| e.to_string())?;
            check(&res, name)?;
        }
    }
    let ironing = objective(0.3, Claim::truncated_normal(0.0, 1.0, -3.0, 3.0).unwrap(), &[0.5, 0.5], &[1.0, 2.0]);
    for lambda in [0.05, 0.3, 1.0] {
        let res = robustq::solve(&ironing, &k, lambda, &settings).map_err(|e| e.to_string())?;
        check(&res, "ironing instance")?;
    }
    for (i, case) in random_cases().iter().enumerate() {
        let res = lambda_of_x(&case.objective, &k, case.x, &settings).map_err(|e| e.to_string())?;
        check(&res.result, &format!("random case {i}"))?;
    }
    Ok(format!("{solves} solves satisfy obstacle, complementarity, ODE and exact zero region"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut instances = 0;
    let mut worst_j = 0.0f64;
    for n in 1..=7 {
        for _ in 0..5 {
            instances += 1;
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..3.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
            let ext = rearrangement_extremes(&CouplingProblem::new(&x, &y).unwrap());
            if !ext.attained_by_sorted_pairings() {
                return Err(format!("n={n}: enumerated extremes differ from sorted pairings: {ext:?}"));
            }

            let claim: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
            let wealth: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..4.0)).collect();
            let alpha = rng.random_range(0.0..=1.0);
            let obj = RobustObjective::new(
                alpha,
                Claim::Discrete(DiscreteDistribution::uniform(&claim).unwrap()),
                UtilitySpec::new(vec![0.5, 1.5], vec![0.7, 1.9]).unwrap(),
            )
            .unwrap();
            let enumerated = coupling_j_alpha(&obj, &wealth).map_err(|e| e.to_string())?;
            let quadrature = obj.j_alpha_steps(&step_quantile(&wealth).unwrap()).map_err(|e| e.to_string())?;
            worst_j = worst_j.max((enumerated.j_alpha - quadrature).abs());
        }
    }
    let detail = format!("{instances} instances, extremes exact, max |J enumerated - J quadrature| {worst_j:.2e}");
    if worst_j < 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Outcome {
    let mut worst_inverse = 0.0f64;
    let mut worst_mean = 0.0f64;
    for &(r, theta, t) in &[(0.02, 0.25, 1.0), (0.02, 0.4, 1.0), (0.05, 0.1, 2.0), (0.0, 0.8, 0.5)] {
        let k = LognormalKernel::new(r, theta, t).unwrap();
        for i in 0..=1000 {
            let p = 1e-6 + (1.0 - 2e-6) * i as f64 / 1000.0;
            let back = k.cdf(k.quantile(p).unwrap()).unwrap();
            worst_inverse = worst_inverse.max((back - p).abs());
        }
        // ∫₀¹ Q_ρ(p) dp with p = Φ(z), trapezoid in z.
        let (lo, hi, m) = (-9.0, 9.0, 20_000);
        let h = (hi - lo) / m as f64;
        let mut integral = 0.0;
        for j in 0..=m {
            let z = lo + h * j as f64;
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            let p = normal::cdf(z);
            if p < 1.0 {
                integral += w * h * k.quantile(p).unwrap() * normal::pdf(z);
            }
        }
        worst_mean = worst_mean.max((integral - (-r * t).exp()).abs());
    }
    let detail =
        format!("max |F(Q(p)) - p| {worst_inverse:.2e} (tol 1e-10), max |mean - e^-rT| {worst_mean:.2e} (tol 1e-6)");
    if worst_inverse < 1e-10 && worst_mean < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let k = kernel();
    let settings = SolveSettings::default();
    let obj = baseline();
    let endowments = [0.17, 6.26, 7.66, 9.72, 15.17];
    let mut worst = 0.0f64;
    let mut lambdas = Vec::new();
    for &x in &endowments {
        let sol = lambda_of_x(&obj, &k, x, &settings).map_err(|e| format!("x={x}: {e}"))?;
        let back = x_of_lambda(&obj, &k, sol.lambda, &settings).map_err(|e| e.to_string())?;
        worst = worst.max((back - x).abs() / x);
        lambdas.push(sol.lambda);
    }
    for (name, own, x) in study_sets() {
        let sol = lambda_of_x(&own, &k, x, &settings).map_err(|e| format!("{name}: {e}"))?;
        let back = x_of_lambda(&own, &k, sol.lambda, &settings).map_err(|e| e.to_string())?;
        worst = worst.max((back - x).abs() / x);
    }
    let (lo, hi) = lambdas.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
    let grid: Vec<f64> = (0..20).map(|i| lo * (hi / lo).powf(i as f64 / 19.0)).collect();
    let curve = BudgetCurve::sample(&obj, &k, &grid, &settings);
    let complete = curve.values().len() == 20;
    let decreasing = curve.is_strictly_decreasing();
    let detail = format!(
        "20-point curve on [{lo:.4}, {hi:.4}] strictly decreasing: {}, round-trip rel error {worst:.2e} (tol 1e-6)",
        complete && decreasing
    );
    if complete && decreasing && worst < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7() -> Outcome {
    let k = kernel();
    let settings = SolveSettings::default();
    let rho = default_rho_grid(&k, 2001);
    let obj = baseline();
    let mut profiles = Vec::new();
    for &x in &[4.0, 7.66, 12.0] {
        let sol = lambda_of_x(&obj, &k, x, &settings).map_err(|e| e.to_string())?;
        profiles.push(profile(&sol.result, &k, &rho).map_err(|e| e.to_string())?);
    }
    let ordered = profiles.windows(2).all(|w| w[0].payoff.iter().zip(&w[1].payoff).all(|(a, b)| a <= b));
    let shifted = profiles.windows(2).all(|w| w[0].payoff.iter().zip(&w[1].payoff).any(|(a, b)| a < b));

    let mut constant_profiles = Vec::new();
    for &alpha in &[0.0, 0.5, 1.0] {
        let obj = objective(alpha, Claim::constant(1.5).unwrap(), &[950.0, 950.0], &[0.010, 0.012]);
        let sol = lambda_of_x(&obj, &k, 7.66, &settings).map_err(|e| e.to_string())?;
        constant_profiles.push(profile(&sol.result, &k, &rho).map_err(|e| e.to_string())?);
    }
    let alpha_gap = constant_profiles.windows(2).map(|w| sup_diff(&w[0].payoff, &w[1].payoff)).fold(0.0, f64::max);

    let mut all_non_increasing = profiles.iter().chain(&constant_profiles).all(|p| p.is_non_increasing());
    for (_, own, x) in study_sets() {
        let sol = lambda_of_x(&own, &k, x, &settings).map_err(|e| e.to_string())?;
        all_non_increasing &= profile(&sol.result, &k, &rho).map_err(|e| e.to_string())?.is_non_increasing();
    }
    let detail = format!(
        "x-ordering {}, alpha-invariance sup gap {alpha_gap:.1e}, profiles non-increasing {all_non_increasing}",
        ordered && shifted
    );
    if ordered && shifted && alpha_gap < 1e-9 && all_non_increasing {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Outcome {
    let k = kernel();
    let (mut worst_ratio, mut worst_diff) = (0.0f64, 0.0f64);
    for (name, obj, x) in study_sets() {
        let coarse_grid = SolverGrid::new(4000, 1e-6).unwrap();
        let fine_grid = SolverGrid::new(8000, 1e-6).unwrap();
        let coarse = lambda_of_x(&obj, &k, x, &SolveSettings::default().with_grid(coarse_grid))
            .map_err(|e| format!("{name}: {e}"))?
            .result;
        let fine = lambda_of_x(&obj, &k, x, &SolveSettings::default().with_grid(fine_grid))
            .map_err(|e| format!("{name}: {e}"))?
            .result;
        let step = fine.grid.step();
        let slope = fine.q.windows(2).map(|w| (w[1] - w[0]) / step).fold(0.0, f64::max);
        let bound = 2.0 * coarse.grid.step() * slope;
        // Fine node 2i coincides with coarse node i.
        let diff = coarse.q.iter().enumerate().map(|(i, q)| (q - fine.q[2 * i]).abs()).fold(0.0, f64::max);
        worst_ratio = worst_ratio.max(diff / bound);
        worst_diff = worst_diff.max(diff);
    }
    let detail = format!("largest sup change {worst_diff:.2e}, ratio to 2 dp max slope {worst_ratio:.2e}");
    if worst_ratio < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("closed-form benchmark", criterion_1),
        ("direct solver equivalence", criterion_2),
        ("KKT and complementarity", criterion_3),
        ("rearrangement oracle", criterion_4),
        ("kernel identities", criterion_5),
        ("budget curve and round-trip", criterion_6),
        ("comparative statics", criterion_7),
        ("grid refinement stability", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} [{name}]: PASS - {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL - {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
