//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! `cargo test -p udop --test acceptance` reports and exits 0 once every
//! criterion has been evaluated; add `-- --strict` to exit 1 on any FAIL.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, StandardNormal};
use udop::energy::student_t::StudentT;
use udop::energy::{regime_priors, NormalGamma, RegressionCoefficients};
use udop::harness::{
    audit_trace, run_experiment, theta_sensitivity_sweep, validate_archive, write_archive, ExperimentConfig,
    ExperimentOutput, InstanceSource,
};
use udop::planners::{PlannerConfig, PlannerKind};
use udop::seed::rng_from_seed;
use udop::sim::MissionTrace;
use udop::solver::{exact_solve, solve_iacs, validate_path, AcsParams, CostGraph, PathSolution};

const ROOT_SEED: u64 = 2024;
const EXECUTIONS: usize = 50;
const GRID: [f64; 4] = [-0.10, 0.0, 0.10, 0.20];
const SIZES: [usize; 3] = [20, 30, 40];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn experiment(sizes: &[usize], planners: &[PlannerKind], dmu: &[f64], dsig: &[f64]) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(
        sizes
            .iter()
            .map(|&n| InstanceSource::generated(common::analog(n)))
            .collect(),
    );
    c.name = "acceptance".into();
    c.root_seed = ROOT_SEED;
    c.n_executions = EXECUTIONS;
    c.planners = planners.to_vec();
    c.delta_mu_grid = dmu.to_vec();
    c.delta_sigma_grid = dsig.to_vec();
    c.planner = PlannerConfig::default();
    c
}

fn run(c: &ExperimentConfig) -> ExperimentOutput {
    let started = Instant::now();
    let out = run_experiment(c, Path::new(".")).expect("experiment runs");
    eprintln!(
        "  ran {} missions ({:?}) in {:.1} s",
        out.traces.len(),
        c.planners,
        started.elapsed().as_secs_f64()
    );
    out
}

fn select<'a>(
    traces: &'a [MissionTrace],
    instance: &str,
    planner: PlannerKind,
    dmu: f64,
) -> impl Iterator<Item = &'a MissionTrace> + 'a {
    let instance = instance.to_string();
    traces
        .iter()
        .filter(move |t| t.instance == instance && t.planner == planner && t.delta_mu == dmu)
}

fn msr<'a>(traces: impl Iterator<Item = &'a MissionTrace>) -> (usize, usize) {
    traces.fold((0, 0), |(w, n), t| (w + t.succeeded() as usize, n + 1))
}

fn success_prizes<'a>(traces: impl Iterator<Item = &'a MissionTrace>) -> Vec<f64> {
    traces.filter(|t| t.succeeded()).map(|t| t.total_prize).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn name(n: usize) -> String {
    common::analog(n).generate().expect("analog generates").name
}

fn c1_prior_closure() -> Verdict {
    let p = regime_priors(&RegressionCoefficients::m100(), 3.93, 1.225).expect("priors");
    let expected = [(579.75, 692.16), (501.80, 423.20), (479.00, 299.45)];
    let got = [p.takeoff, p.cruise, p.landing];
    let worst = got
        .iter()
        .zip(expected)
        .map(|(d, (m, v))| (d.mean - m).abs().max((d.variance - v).abs()))
        .fold(0.0, f64::max);
    verdict(
        worst <= 0.01,
        format!(
            "N({:.4}, {:.4}) N({:.4}, {:.4}) N({:.4}, {:.4}); worst deviation {worst:.5}",
            p.takeoff.mean, p.takeoff.variance, p.cruise.mean, p.cruise.variance, p.landing.mean, p.landing.variance
        ),
    )
}

fn c2_bayesian_suite() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;

    // Dyadic inputs keep the hand results exact in floating point.
    let a = NormalGamma::new(500.0, 2.0, 2.0, 400.0)
        .unwrap()
        .update(&[504.0, 508.0]);
    let b = NormalGamma::new(500.0, 1.0, 2.0, 400.0).unwrap().update(&[550.0]);
    let hand = a == NormalGamma::new(503.0, 4.0, 3.0, 422.0).unwrap()
        && b == NormalGamma::new(525.0, 2.0, 2.5, 1025.0).unwrap();
    pass &= hand;
    notes.push(format!("hand cases {}", if hand { "exact" } else { "differ" }));

    let mut runner = TestRunner::new(PropConfig {
        cases: 2000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let strategy = (
        300.0f64..700.0,
        0.1f64..50.0,
        0.6f64..100.0,
        1.0f64..5000.0,
        0.001f64..0.999,
    );
    let round_trip = runner.run(&strategy, |(mu, kappa, alpha, beta, theta)| {
        let ng = NormalGamma::new(mu, kappa, alpha, beta).unwrap();
        let x = ng.predictive_quantile(theta).unwrap();
        prop_assert!(
            (ng.predictive_cdf(x) - theta).abs() < 1e-9,
            "cdf(quantile({theta})) = {}",
            ng.predictive_cdf(x)
        );
        Ok(())
    });
    pass &= round_trip.is_ok();
    notes.push(match round_trip {
        Ok(()) => "2000 quantile/cdf round trips within 1e-9".into(),
        Err(e) => format!("round trip: {e}"),
    });

    let ng = NormalGamma::new(501.8, 1.0, 2.0, 423.2)
        .unwrap()
        .update(&[520.0, 531.0, 509.0, 526.0]);
    let mut rng = rng_from_seed(ROOT_SEED);
    let gamma = Gamma::new(ng.alpha, 1.0 / ng.beta).unwrap();
    let draws = 1_000_000;
    let mut xs: Vec<f64> = (0..draws)
        .map(|_| {
            let tau: f64 = gamma.sample(&mut rng);
            let mu = ng.mu + rng.sample::<f64, _>(StandardNormal) / (ng.kappa * tau).sqrt();
            mu + rng.sample::<f64, _>(StandardNormal) / tau.sqrt()
        })
        .collect();
    xs.sort_by(f64::total_cmp);
    let worst_mc = PlannerConfig::default()
        .theta_levels()
        .into_iter()
        .map(|theta| {
            let q = ng.predictive_quantile(theta).unwrap();
            let frac = xs.partition_point(|&x| x <= q) as f64 / draws as f64;
            (frac - theta).abs()
        })
        .fold(0.0, f64::max);
    pass &= worst_mc <= 1e-3;
    notes.push(format!("MC oracle worst |F - theta| {worst_mc:.2e}"));

    let (m, s) = (548.0, 27.0);
    let truth = Normal::new(m, s).unwrap();
    let samples: Vec<f64> = (0..10_000).map(|_| truth.sample(&mut rng)).collect();
    let post = NormalGamma::new(501.8, 1.0, 2.0, 423.2).unwrap().update(&samples);
    let sd_hat = (post.beta / post.alpha).sqrt();
    let consistent = (post.mu - m).abs() <= 0.02 * m && (sd_hat - s).abs() <= 0.02 * s;
    pass &= consistent;
    notes.push(format!(
        "n=1e4 posterior mean {:.2} (truth {m}), sd {sd_hat:.2} (truth {s})",
        post.mu
    ));

    verdict(pass, notes.join("; "))
}

/// Feasibility and totals recomputed from the raw graph, without the
/// solver's own bookkeeping.
fn independently_feasible(g: &CostGraph, sol: &PathSolution) -> bool {
    let seq = &sol.sequence;
    if seq.first() != Some(&g.start()) || seq.last() != Some(&g.end()) {
        return false;
    }
    let inner = &seq[1..seq.len() - 1];
    let mut seen = vec![false; g.len()];
    for &v in inner {
        if v == g.start() || v == g.end() || v >= g.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    let cost: f64 =
        seq.windows(2).map(|w| g.cost(w[0], w[1])).sum::<f64>() + inner.iter().map(|&v| g.service(v)).sum::<f64>();
    let prize: f64 = inner.iter().map(|&v| g.prize(v)).sum();
    cost <= g.budget() + 1e-9 && (cost - sol.total_cost).abs() < 1e-9 && (prize - sol.total_prize).abs() < 1e-9
}

fn c3_solver_vs_oracle() -> Verdict {
    let (mut hits, mut runs, mut over, mut invalid) = (0, 0, 0, 0);
    for i in 0..50u64 {
        let g = common::binding_graph(8, 5000 + i);
        let best = exact_solve(&g).unwrap();
        for seed in 0..3 {
            let sol = solve_iacs(&g, &AcsParams::default().with_seed(seed), None).unwrap();
            runs += 1;
            if validate_path(&g, &sol).is_err() || !independently_feasible(&g, &sol) {
                invalid += 1;
            }
            if sol.total_prize > best.total_prize + 1e-9 {
                over += 1;
            } else if sol.total_prize >= best.total_prize - 1e-9 {
                hits += 1;
            }
        }
    }
    let rate = hits as f64 / runs as f64;
    verdict(
        rate >= 0.90 && over == 0 && invalid == 0,
        format!(
            "optimum found in {hits}/{runs} runs ({:.1}%); {over} above optimum; {invalid} infeasible",
            100.0 * rate
        ),
    )
}

fn c4_adapt_robustness(adapt: &ExperimentOutput) -> Verdict {
    let worst = adapt.metrics.iter().min_by(|a, b| a.msr.total_cmp(&b.msr)).unwrap();
    let below: Vec<String> = adapt
        .metrics
        .iter()
        .filter(|m| m.msr < 0.98)
        .map(|m| {
            format!(
                "{} dmu {:+} dsig {:+}: {:.2}",
                m.instance, m.delta_mu, m.delta_sigma, m.msr
            )
        })
        .collect();
    verdict(
        below.is_empty() && adapt.metrics.len() == 48,
        format!(
            "{} cells; lowest MSR {:.2} ({} dmu {:+} dsig {:+}){}",
            adapt.metrics.len(),
            worst.msr,
            worst.instance,
            worst.delta_mu,
            worst.delta_sigma,
            if below.is_empty() {
                String::new()
            } else {
                format!("; below 98%: {}", below.join(", "))
            }
        ),
    )
}

fn c5_baseline_degradation(adapt: &ExperimentOutput, romp: &ExperimentOutput, offline: &ExperimentOutput) -> Verdict {
    let n20 = name(20);
    let (aw, an) = msr(select(&adapt.traces, &n20, PlannerKind::Adapt, 0.2));
    let (rw, rn) = msr(select(&romp.traces, &n20, PlannerKind::Romp, 0.2));
    let gap = aw as f64 / an as f64 - rw as f64 / rn as f64;
    let mut offline_notes = Vec::new();
    let mut offline_fails = false;
    for n in SIZES {
        for dmu in [0.1, 0.2] {
            let (w, t) = msr(select(&offline.traces, &name(n), PlannerKind::Offline, dmu));
            offline_fails |= w < t;
            offline_notes.push(format!("{n}n dmu {dmu:+}: {w}/{t}"));
        }
    }
    verdict(
        gap >= 0.20 && offline_fails,
        format!(
            "20-node dmu +0.2: ADAPT {aw}/{an}, ROMP {rw}/{rn}, gap {:.0} pts; Offline {}",
            100.0 * gap,
            offline_notes.join(", ")
        ),
    )
}

/// One-sided Welch test of mean(a) > mean(b); returns (t, dof, p).
fn welch_greater(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let var = |xs: &[f64]| {
        let m = mean(xs);
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let (va, vb) = (var(a) / a.len() as f64, var(b) / b.len() as f64);
    let t = (mean(a) - mean(b)) / (va + vb).sqrt();
    let dof = (va + vb).powi(2) / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    (t, dof, 1.0 - StudentT::new(dof).cdf(t))
}

fn c6_solution_quality(adapt: &ExperimentOutput, mcgreedy: &ExperimentOutput) -> Verdict {
    let n40 = name(40);
    let cell = |t: &&MissionTrace| t.delta_sigma == 0.0;
    let a = success_prizes(select(&adapt.traces, &n40, PlannerKind::Adapt, 0.2).filter(cell));
    let m = success_prizes(select(&mcgreedy.traces, &n40, PlannerKind::McGreedy, 0.2).filter(cell));
    if a.len() < 2 || m.len() < 2 {
        return verdict(
            false,
            format!("too few successes: ADAPT {}, MCGreedy {}", a.len(), m.len()),
        );
    }
    let (t, dof, p) = welch_greater(&a, &m);
    verdict(
        p < 0.05,
        format!(
            "40-node dmu +0.2 dsig 0: ADAPT P* {:.3} kJ (n={}), MCGreedy {:.3} kJ (n={}); Welch t {t:.3}, dof {dof:.1}, one-sided p {p:.4}",
            mean(&a),
            a.len(),
            mean(&m),
            m.len()
        ),
    )
}

fn c7_timing(outputs: &[&ExperimentOutput]) -> Verdict {
    let n40 = name(40);
    let mut worst: Vec<(PlannerKind, f64, usize)> = Vec::new();
    for out in outputs {
        for t in out.traces.iter().filter(|t| t.instance == n40) {
            let slot = match worst.iter_mut().find(|w| w.0 == t.planner) {
                Some(s) => s,
                None => {
                    worst.push((t.planner, 0.0, 0));
                    worst.last_mut().unwrap()
                }
            };
            for s in t.replan_wall_times() {
                slot.1 = slot.1.max(s);
                slot.2 += 1;
            }
        }
    }
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let total: usize = worst.iter().map(|w| w.2).sum();
    let parts: Vec<String> = worst
        .iter()
        .map(|(p, s, n)| format!("{p} max {s:.3} s over {n}"))
        .collect();
    verdict(
        max < 10.0 && total > 0,
        format!("{total} re-plans on the 40-node analog; {}", parts.join(", ")),
    )
}

fn c8_theta_sensitivity(sweep: &ExperimentOutput) -> Verdict {
    let n20 = name(20);
    let n20 = n20.as_str();
    let at = |theta: f64| {
        sweep
            .traces
            .iter()
            .filter(move |t| t.theta_min == theta && t.instance == n20 && t.delta_mu == 0.2)
    };
    let (w45, n45) = msr(at(0.45));
    let (w75, n75) = msr(at(0.75));
    let p45 = success_prizes(at(0.45));
    let p85 = success_prizes(at(0.85));
    let (m45, m85) = (mean(&p45), mean(&p85));
    verdict(
        w45 * n75 <= w75 * n45 && !p45.is_empty() && !p85.is_empty() && m45 >= m85,
        format!(
            "20-node dmu +0.2: MSR 0.45 {w45}/{n45} vs 0.75 {w75}/{n75}; mean P* 0.45 {m45:.3} vs 0.85 {m85:.3} kJ"
        ),
    )
}

fn c9_audit(outputs: &[&ExperimentOutput]) -> Verdict {
    let all: Vec<&MissionTrace> = outputs.iter().flat_map(|o| o.traces.iter()).collect();
    let mut rng = rng_from_seed(ROOT_SEED ^ 9);
    let sample: Vec<&&MissionTrace> = all.choose_multiple(&mut rng, 100).collect();
    let replays: usize = sample
        .iter()
        .map(|t| t.replans.iter().filter(|r| r.posteriors.is_some()).count())
        .sum();
    let failures: Vec<String> = sample
        .iter()
        .filter_map(|t| audit_trace(t).err())
        .map(|e| e.to_string())
        .collect();

    let dir = tempfile::tempdir().expect("temp dir");
    let archive = write_archive(dir.path(), outputs[0]).and_then(|_| validate_archive(dir.path()));
    verdict(
        sample.len() == 100 && failures.is_empty() && archive.is_ok(),
        format!(
            "{} sampled traces from {}, {replays} posterior replays, {} audit failures{}; archive check {}",
            sample.len(),
            all.len(),
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default(),
            match archive {
                Ok(r) => format!("{} traces, {} rows match", r.traces, r.metrics_rows),
                Err(e) => e.to_string(),
            }
        ),
    )
}

fn main() -> ExitCode {
    let strict = std::env::args().any(|a| a == "--strict");
    let started = Instant::now();
    let mut verdicts: Vec<(u8, &str, Verdict)> = Vec::new();
    let mut report = |id: u8, title: &'static str, v: Verdict| {
        println!("{} [{id}] {title}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        verdicts.push((id, title, v));
    };

    report(1, "prior closure", c1_prior_closure());
    report(2, "Bayesian suite", c2_bayesian_suite());
    report(3, "solver vs exact oracle", c3_solver_vs_oracle());

    let adapt = run(&experiment(&SIZES, &[PlannerKind::Adapt], &GRID, &GRID));
    report(4, "ADAPT robustness", c4_adapt_robustness(&adapt));

    let romp = run(&experiment(&[20], &[PlannerKind::Romp], &[0.2], &GRID));
    let offline = run(&experiment(&SIZES, &[PlannerKind::Offline], &[0.1, 0.2], &GRID));
    report(
        5,
        "baseline degradation",
        c5_baseline_degradation(&adapt, &romp, &offline),
    );

    let mcgreedy = run(&experiment(&[40], &[PlannerKind::McGreedy], &[0.2], &[0.0]));
    report(
        6,
        "solution quality vs MCGreedy",
        c6_solution_quality(&adapt, &mcgreedy),
    );

    let others = run(&experiment(
        &[40],
        &[PlannerKind::Romp, PlannerKind::WeightedErr],
        &[0.2],
        &[0.0],
    ));
    report(7, "re-plan timing", c7_timing(&[&adapt, &mcgreedy, &others]));

    let sweep = theta_sensitivity_sweep(
        &experiment(&[20], &[PlannerKind::Adapt], &[0.2], &GRID),
        &[0.45, 0.75, 0.85],
        Path::new("."),
    )
    .expect("sweep runs");
    report(8, "safety-belief sensitivity", c8_theta_sensitivity(&sweep));

    report(
        9,
        "audit and conservation",
        c9_audit(&[&adapt, &romp, &offline, &mcgreedy, &others, &sweep]),
    );

    let passed = verdicts.iter().filter(|v| v.2.pass).count();
    println!(
        "acceptance: {passed}/{} criteria passed in {:.0} s",
        verdicts.len(),
        started.elapsed().as_secs_f64()
    );
    if strict && passed < verdicts.len() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
