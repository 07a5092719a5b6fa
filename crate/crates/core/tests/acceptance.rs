//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use dpg::cli::{cmd_solve, SolveArgs, SolverFlags, Switch, NoiseArg, PivotArg, TraceArg};
use dpg::conditioning::{gap_lower_bound, noise_bound, perturb_weights, recover_exact_solution, true_gap, Gap, GAP_STRATEGY_CAP};
use dpg::constraints::{objective_value, verify_solution, OffsetFactors};
use dpg::game::{joint_strategy_valuation, lasso_of, lasso_value, Game, JointStrategy, Valuation};
use dpg::improvement::{choose_initial_strategies, solve, ImprovementKind, IterationRecord, PivotMode, SolverConfig, TraceLevel};
use dpg::oracles::{brute_force_solve, value_iteration, BRUTE_FORCE_CAP};
use dpg::rational::{abs_diff, int, ratio, Fraction, Rational};
use num_traits::Zero;

use common::{data_path, g1, g2, random_game, sweep_game};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, secs: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(secs), || format!("took {elapsed:?}, limit {secs} s"))
}

fn full() -> SolverConfig {
    SolverConfig { trace: TraceLevel::Full, ..SolverConfig::default() }
}

/// Traces collected from criteria 1 to 5 for the descent check.
#[derive(Default)]
struct Traces(Vec<(String, Vec<IterationRecord>)>);

fn c1(traces: &mut Traces) -> Outcome {
    let started = Instant::now();
    let args = SolveArgs {
        file: data_path("g1.dpg"),
        seed: 0,
        solver: SolverFlags {
            initial_seed: None,
            alpha: Switch::On,
            noise: NoiseArg::OnDegeneracy,
            pivot: PivotArg::LpFirst,
            max_iterations: None,
        },
        trace: TraceArg::Summary,
        check: false,
        json: true,
    };
    let r = cmd_solve(&args);
    let elapsed = started.elapsed();
    ensure(r.exit_code == 0, || format!("exit {}: {}", r.exit_code, r.stderr))?;
    let p = &r.payload;
    ensure(p["valuation"]["a"] == "2/1" && p["valuation"]["b"] == "1/1", || format!("valuation {}", p["valuation"]))?;
    ensure(p["strategy"]["a"] == "a" && p["strategy"]["b"] == "a", || format!("strategy {}", p["strategy"]))?;
    within(elapsed, 1)?;
    let g = g1();
    let sol = solve(&g, &full()).map_err(|e| e.to_string())?;
    traces.0.push(("G1".into(), sol.trace));
    Ok(format!("val(a)=2, val(b)=1, a->a, b->a in {elapsed:?}"))
}

fn c2(traces: &mut Traces) -> Outcome {
    let g = g2();
    let started = Instant::now();
    let cfg = SolverConfig { use_offset_factors: false, ..full() };
    let sol = solve(&g, &cfg).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let t = &sol.trace;
    ensure(t[0].start_strategy == JointStrategy::lowest_edges(&g), || "first LP not from the self-loops".into())?;
    ensure(t[0].objective == int(1), || format!("first optimum {}", Fraction(&t[0].objective)))?;
    ensure(t[0].valuation.as_ref().map(|v| v.0.clone()) == Some(vec![int(0), int(0)]), || "first optimum not at {a:0,b:0}".into())?;
    ensure(sol.valuation.0 == vec![int(3), int(2)], || format!("valuation {}", sol.valuation.describe(&g)))?;
    ensure(t.last().unwrap().objective.is_zero(), || "final objective nonzero".into())?;
    let updates = t.iter().filter(|r| r.next_strategy.is_some()).count();
    ensure(updates <= 2, || format!("{updates} objective updates"))?;
    // the default biased objective must reach the same answer
    let biased = solve(&g, &full()).map_err(|e| e.to_string())?;
    ensure(biased.valuation == sol.valuation, || "biased run differs".into())?;
    within(elapsed, 1)?;
    let kinds: Vec<String> = t.iter().map(|r| format!("{}:{}", r.kind, Fraction(&r.objective))).collect();
    traces.0.push(("G2".into(), sol.trace));
    traces.0.push(("G2 biased".into(), biased.trace));
    Ok(format!("trace {} in {elapsed:?}", kinds.join(" ")))
}

fn c3() -> Outcome {
    let ones = OffsetFactors::ones(3);
    let cases = [
        (g1(), [int(2), int(1)], ratio(1, 2)),
        (g1(), [int(0), int(0)], int(1)),
        (g2(), [int(3), int(2)], ratio(4, 3)),
        (g2(), [int(0), int(0)], int(1)),
    ];
    for (g, val, expected) in cases {
        let sigma = JointStrategy::lowest_edges(&g);
        let got = objective_value(&g, &Valuation(val.to_vec()), &sigma, &ones);
        ensure(got == expected, || format!("got {} expected {}", Fraction(&got), Fraction(&expected)))?;
    }
    Ok("1/2, 1, 4/3, 1".into())
}

fn c4(traces: &mut Traces) -> Outcome {
    let started = Instant::now();
    for i in 0..200 {
        let g = sweep_game(i, 6);
        let bf = brute_force_solve(&g, BRUTE_FORCE_CAP).map_err(|e| e.to_string())?;
        let sol = solve(&g, &full()).map_err(|e| format!("instance {i}: {e}"))?;
        ensure(sol.valuation == bf.valuation, || format!("instance {i}: valuation differs from brute force"))?;
        traces.0.push((format!("sweep {i}"), sol.trace));
    }
    let elapsed = started.elapsed();
    within(elapsed, 60)?;
    Ok(format!("200/200 exact in {elapsed:?}"))
}

fn c5(traces: &mut Traces) -> Outcome {
    let started = Instant::now();
    let tol = ratio(1, 1_000_000);
    let mut worst = Rational::zero();
    for i in 0..50u64 {
        let g = random_game(5000 + i, 1 + (i as usize * 11) % 20, 1 + (i as usize) % 3);
        let sol = solve(&g, &full()).map_err(|e| format!("instance {i}: {e}"))?;
        let vi = value_iteration(&g, &tol).map_err(|e| e.to_string())?;
        for v in g.vertices() {
            let d = abs_diff(&sol.valuation[v], &vi[v]);
            if d > worst {
                worst = d;
            }
        }
        traces.0.push((format!("vi {i}"), sol.trace));
    }
    ensure(worst <= tol, || format!("sup-norm difference {}", Fraction(&worst)))?;
    let elapsed = started.elapsed();
    within(elapsed, 60)?;
    Ok(format!("max difference {:.3e} in {elapsed:?}", dpg::rational::to_f64(&worst)))
}

fn c6(traces: &Traces) -> Outcome {
    let mut updates = 0;
    for (name, trace) in &traces.0 {
        ensure(!trace.is_empty(), || format!("{name}: empty trace"))?;
        for r in trace {
            ensure(r.objective >= int(0), || format!("{name}: negative objective"))?;
        }
        for w in trace.windows(2) {
            if w[0].epoch == w[1].epoch && w[0].kind != ImprovementKind::Restart {
                updates += 1;
                ensure(w[1].objective < w[0].objective, || {
                    format!("{name}: {} then {}", Fraction(&w[0].objective), Fraction(&w[1].objective))
                })?;
            }
        }
        ensure(trace.last().unwrap().objective.is_zero(), || format!("{name}: does not end at 0"))?;
    }
    Ok(format!("{} traces, {updates} objective updates, all strictly decreasing", traces.0.len()))
}

fn small_games() -> Vec<Game> {
    (0..50).map(|i| sweep_game(7000 + i, 5)).collect()
}

fn c7() -> Outcome {
    let started = Instant::now();
    let mut checked = 0;
    for (i, g) in small_games().iter().enumerate() {
        let eps = noise_bound(g);
        let noisy = perturb_weights(g, &eps, i as u64).map_err(|e| e.to_string())?;
        let orig = brute_force_solve(g, BRUTE_FORCE_CAP).map_err(|e| e.to_string())?;
        let pert = brute_force_solve(&noisy, BRUTE_FORCE_CAP).map_err(|e| e.to_string())?;
        for s in &pert.co_optimal {
            ensure(joint_strategy_valuation(g, s) == orig.valuation, || format!("game {i}: strategy not co-optimal in original"))?;
            let rec = recover_exact_solution(g, s).map_err(|e| format!("game {i}: {e}"))?;
            ensure(verify_solution(g, &rec), || format!("game {i}: recovered valuation fails verification"))?;
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    within(elapsed, 120)?;
    Ok(format!("{checked} perturbed co-optimal strategies transfer, {elapsed:?}"))
}

fn c8() -> Outcome {
    ensure(gap_lower_bound(&g1()) == ratio(1, 32), || "G1 bound".into())?;
    ensure(true_gap(&g1(), GAP_STRATEGY_CAP) == Ok(Gap::Gap(int(1))), || "G1 gap".into())?;
    let (mut gaps, mut all_co) = (0, 0);
    for (i, g) in small_games().iter().enumerate() {
        match true_gap(g, GAP_STRATEGY_CAP).map_err(|e| e.to_string())? {
            Gap::Gap(gap) => {
                let lb = gap_lower_bound(g);
                ensure(lb <= gap, || format!("game {i}: bound {} > gap {}", Fraction(&lb), Fraction(&gap)))?;
                gaps += 1;
            }
            Gap::AllCoOptimal => all_co += 1,
        }
    }
    Ok(format!("G1 1/32 <= 1; {gaps} bounded gaps, {all_co} all-co-optimal games"))
}

fn c9() -> Outcome {
    for i in 0..50 {
        let g = sweep_game(9000 + i, 6);
        let plain = solve(&g, &SolverConfig { use_offset_factors: false, ..SolverConfig::default() }).map_err(|e| e.to_string())?;
        for seed in [1, 2, 3] {
            let sol = solve(&g, &SolverConfig { seed, ..SolverConfig::default() }).map_err(|e| e.to_string())?;
            ensure(sol.valuation == plain.valuation, || format!("game {i} seed {seed}: valuation differs"))?;
        }
    }
    Ok("50 games x 3 seeds identical to unit offset factors".into())
}

fn c10() -> Outcome {
    for i in 0..200 {
        let g = sweep_game(i, 6);
        let lp_first = solve(&g, &SolverConfig::default()).map_err(|e| e.to_string())?;
        let mixed = solve(&g, &SolverConfig { pivot_mode: PivotMode::Mixed, ..SolverConfig::default() }).map_err(|e| e.to_string())?;
        ensure(lp_first.valuation == mixed.valuation, || format!("instance {i}: modes differ"))?;
    }
    Ok("200/200 identical".into())
}

fn c11() -> Outcome {
    let mut pairs = 0;
    for i in 0..1000u64 {
        let g = random_game(20_000 + i, 1 + (i as usize) % 8, 1 + (i as usize / 8) % 3);
        let sigma = choose_initial_strategies(&g, Some(i));
        let val = joint_strategy_valuation(&g, &sigma);
        for v in g.vertices() {
            let lasso = lasso_value(&g, &lasso_of(&g, &sigma, v));
            ensure(lasso == val[v], || format!("pair {i} vertex {v}"))?;
        }
        pairs += 1;
    }
    Ok(format!("{pairs} pairs exact"))
}

fn main() {
    let mut traces = Traces::default();
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "golden example G1", c1(&mut traces)),
        (2, "golden example G2 trace", c2(&mut traces)),
        (3, "golden objective values", c3()),
        (4, "brute-force equivalence sweep", c4(&mut traces)),
        (5, "value-iteration concordance", c5(&mut traces)),
        (6, "descent property", c6(&traces)),
        (7, "perturbation transfer", c7()),
        (8, "gap ordering", c8()),
        (9, "offset-factor invariance", c9()),
        (10, "pivot-mode equivalence", c10()),
        (11, "lasso value identity", c11()),
    ];

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
