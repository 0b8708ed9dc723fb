//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rbembed::kernels::{
    hit_cdf_1s, hit_lower_first_cdf, hit_upper_first_cdf, normal_sf, survival_density_1s, survival_density_2s,
};
use rbembed::law::{quantize, DiscreteLaw, TargetLawSpec};
use rbembed::solver::{check_structure, solve};
use rbembed::verify::{
    barrier_levy_distance, compare_with_azema_yor, ks_on_nodes, verify_embedding, StepFn, DEFAULT_T_GRID,
};
use rbembed::{Barrier, KernelConfig, SimConfig, SolverConfig};

struct Outcome {
    passed: bool,
    detail: String,
}

struct Suite {
    results: Vec<(usize, &'static str, Outcome, Duration, Duration)>,
    /// Every (law, barrier) pair solved along the way, for the structure check.
    solved: Vec<(String, DiscreteLaw, Barrier)>,
}

impl Suite {
    fn run(&mut self, id: usize, name: &'static str, limit: Duration, f: impl FnOnce(&mut Suite) -> Outcome) {
        let start = Instant::now();
        let outcome = f(self);
        self.results.push((id, name, outcome, start.elapsed(), limit));
    }

    fn solve(&mut self, label: &str, law: &DiscreteLaw) -> Barrier {
        let r = solve(law, &SolverConfig::default()).expect("solve");
        self.solved.push((label.to_string(), law.clone(), r.barrier.clone()));
        r.barrier
    }
}

fn law(atoms: &[(f64, f64)]) -> DiscreteLaw {
    DiscreteLaw::new(atoms.to_vec()).unwrap()
}

fn spec(json: &str) -> DiscreteLaw {
    let s: TargetLawSpec = serde_json::from_str(json).unwrap();
    quantize(&s).unwrap()
}

fn sim(n_paths: usize) -> SimConfig {
    // The horizon is far out because the stopping time of a law with mass
    // on distant atoms has a very heavy tail.
    SimConfig { n_paths, horizon: 1e12, ..SimConfig::default() }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

fn closed_form_step(s: &mut Suite) -> Outcome {
    let (mut lo, mut hi) = (0.1f64, 100.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * normal_sf(1.0 / mid.sqrt()) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let b = s.solve("1/2 d1 + 1/2 d2", &law(&[(1.0, 0.5), (2.0, 0.5)]));
    let t1 = b.breakpoints()[0].t_end;
    let rel = (t1 - oracle).abs() / oracle;
    Outcome {
        passed: rel < 1e-6,
        detail: format!("t1 = {t1:.12}, oracle {oracle:.12}, relative error {rel:.1e}"),
    }
}

fn symmetry(s: &mut Suite) -> Outcome {
    let mut ok = true;
    let mut seen = Vec::new();
    for a in [0.5, 1.0, 2.0] {
        let b = s.solve(&format!("1/2 d-{a} + 1/2 d{a}"), &law(&[(-a, 0.5), (a, 0.5)]));
        let bp = b.breakpoints();
        let exact = bp.len() == 1 && bp[0].t_end == f64::INFINITY && bp[0].upper == a && bp[0].lower == -a;
        ok &= exact;
        seen.push(format!("a={a}: {} breakpoint(s)", bp.len()));
    }
    Outcome { passed: ok, detail: seen.join(", ") }
}

fn kernel_conservation(_: &mut Suite) -> Outcome {
    let cfg = KernelConfig::default();
    let mut worst: f64 = 0.0;
    for t in [0.1f64, 1.0, 10.0] {
        for y in [0.5, 1.0, 3.0] {
            let lo = -14.0 * t.sqrt();
            let f = simpson(|x| if x < y { survival_density_1s(t, x, y).unwrap() } else { 0.0 }, lo, y, 40_000);
            worst = worst.max((f + hit_cdf_1s(t, y).unwrap() - 1.0).abs());
            for z in [-0.5, -1.0, -3.0] {
                let inside = |x: f64| {
                    if x > z && x < y {
                        survival_density_2s(t, x, y, z, &cfg).unwrap()
                    } else {
                        0.0
                    }
                };
                let f2 = simpson(inside, z, y, 40_000);
                let g2 = hit_upper_first_cdf(t, y, z, &cfg).unwrap();
                let h2 = hit_lower_first_cdf(t, y, z, &cfg).unwrap();
                worst = worst.max((f2 + g2 + h2 - 1.0).abs());
            }
        }
    }
    Outcome {
        passed: worst <= 1e-9,
        detail: format!("largest |total - 1| over 9 one-sided and 27 two-sided cases: {worst:.1e}"),
    }
}

fn exponential_embedding(l: &DiscreteLaw, b: &Barrier) -> (Outcome, String) {
    let report = verify_embedding(l, b, &sim(100_000)).unwrap();
    let nodes: Vec<f64> = l.positions().collect();
    let emp = StepFn::new(0.0, report.empirical_cdf.clone());
    let ks = ks_on_nodes(&emp, |x| -(-x).exp_m1(), &nodes);
    let passed = report.levy_distance <= 0.01 && ks <= 0.02 && report.truncated_fraction <= 1e-3;
    let detail = format!(
        "Levy {:.5} (<= 0.01), KS to continuous law at the grid nodes {:.5} (<= 0.02), truncated {:.1e}",
        report.levy_distance, ks, report.truncated_fraction
    );
    (Outcome { passed, detail }, serde_json::to_string(&report).unwrap())
}

fn centered_suite() -> Vec<(&'static str, DiscreteLaw)> {
    vec![
        ("1/2 d-1 + 1/2 d1", law(&[(-1.0, 0.5), (1.0, 0.5)])),
        ("0.4 d-1.5 + 0.6 d1", law(&[(-1.5, 0.4), (1.0, 0.6)])),
        ("three atoms", law(&[(-2.0, 0.25), (-0.5, 0.25), (1.25, 0.5)])),
        ("five atoms", law(&[(-3.0, 0.1), (-1.0, 0.3), (0.5, 0.3), (1.0, 0.2), (2.5, 0.1)])),
        (
            "quantized N(0,1)",
            spec(r#"{"kind": "normal", "mean": 0.0, "variance": 1.0, "step": 0.25, "range": [-3, 3]}"#),
        ),
    ]
}

fn moment_identity(s: &mut Suite) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, l) in centered_suite() {
        assert!(l.mean().abs() <= 1e-10, "{name} is not centered");
        let b = s.solve(name, &l);
        let r = verify_embedding(&l, &b, &sim(100_000)).unwrap();
        let z = (r.mean_tau - r.second_moment).abs() / r.se_mean_tau;
        ok &= z <= 3.0 && r.truncated_fraction == 0.0;
        parts.push(format!("{name}: {:.4} vs {:.4} ({z:.2} SE)", r.mean_tau, r.second_moment));
    }
    Outcome { passed: ok, detail: parts.join("; ") }
}

fn optimality(s: &mut Suite) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let laws = [
        ("1/2 d-2 + 1/2 d2", law(&[(-2.0, 0.5), (2.0, 0.5)])),
        ("three atoms", law(&[(-2.0, 0.25), (-0.5, 0.25), (1.25, 0.5)])),
    ];
    for (name, l) in laws {
        let b = s.solve(name, &l);
        let o = compare_with_azema_yor(&l, &b, &sim(100_000), &DEFAULT_T_GRID).unwrap();
        let rows_ok = o.comparison.rows.iter().all(|r| r.passed);
        ok &= o.self_check_passed && rows_ok;
        parts.push(format!(
            "{name}: AY self-check {:.4}, worst margin {:.2} SE{}",
            o.azema_yor_levy_distance,
            o.comparison.worst_margin_in_se(),
            if o.comparison.sqrt_functional.passed { "" } else { " (sqrt functional above slack)" }
        ));
    }
    Outcome { passed: ok, detail: parts.join("; ") }
}

/// Bounded two-sided laws with two or three atoms. Every third law is
/// centered exactly; the others are kept clear of zero mean.
fn random_laws() -> Vec<DiscreteLaw> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_613);
    let mut out = Vec::new();
    while out.len() < 20 {
        let grid = |rng: &mut ChaCha8Rng| (rng.random_range(1..=12) as f64) * 0.25;
        let mut neg = vec![-grid(&mut rng)];
        let mut pos = vec![grid(&mut rng)];
        if out.len() % 2 == 1 {
            if rng.random::<bool>() {
                pos.push(pos[0] + grid(&mut rng));
            } else {
                neg.push(neg[0] - grid(&mut rng));
            }
        }
        let side_mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        // Mass alpha on the positive side, spread evenly within each side.
        let alpha = if out.len() % 3 == 0 {
            let (mn, mp) = (side_mean(&neg), side_mean(&pos));
            -mn / (mp - mn)
        } else {
            rng.random_range(0.1..0.9)
        };
        let mut atoms: Vec<(f64, f64)> = neg.iter().map(|&x| (x, (1.0 - alpha) / neg.len() as f64)).collect();
        atoms.extend(pos.iter().map(|&x| (x, alpha / pos.len() as f64)));
        let l = DiscreteLaw::canonical(atoms).unwrap();
        let m = l.mean();
        if m.abs() > 1e-9 && m.abs() < 0.02 {
            continue;
        }
        out.push(l);
    }
    out
}

fn finiteness(s: &mut Suite) -> Outcome {
    let (mut ok, mut counts) = (true, [0usize; 3]);
    let mut bad = Vec::new();
    for (i, l) in random_laws().into_iter().enumerate() {
        let r = solve(&l, &SolverConfig::default()).unwrap();
        s.solved.push((format!("random law {i}"), l.clone(), r.barrier.clone()));
        let m = l.mean();
        let expected = if m.abs() <= 1e-9 {
            counts[1] += 1;
            (false, false)
        } else if m < 0.0 {
            counts[0] += 1;
            (true, false)
        } else {
            counts[2] += 1;
            (false, true)
        };
        let got = (r.upper_exhausted_at.is_some(), r.lower_exhausted_at.is_some());
        let flags_match_barrier =
            r.upper_exhausted_at == r.barrier.upper_infinite_from() && r.lower_exhausted_at == r.barrier.lower_infinite_from();
        if got != expected || !flags_match_barrier {
            ok = false;
            bad.push(format!("law {i} (mean {m:.3e}): upper/lower infinite {got:?}"));
        }
    }
    Outcome {
        passed: ok,
        detail: format!(
            "{} negative-mean, {} centered, {} positive-mean laws{}",
            counts[0],
            counts[1],
            counts[2],
            if bad.is_empty() { String::new() } else { format!("; mismatches: {}", bad.join(", ")) }
        ),
    }
}

fn structure(s: &mut Suite) -> Outcome {
    let mut bad = Vec::new();
    for (label, l, b) in &s.solved {
        let problems = check_structure(l, b);
        if !problems.is_empty() {
            bad.push(format!("{label}: {}", problems.join("; ")));
        }
    }
    Outcome {
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} barriers flat exactly on their atoms", s.solved.len())
        } else {
            bad.join(" | ")
        },
    }
}

fn convergence(s: &mut Suite) -> Outcome {
    let barriers: Vec<Barrier> = [20, 40, 80, 160, 320]
        .iter()
        .map(|n| {
            let l = spec(&format!(r#"{{"kind": "exponential", "rate": 1.0, "n": {n}}}"#));
            s.solve(&format!("exponential n={n}"), &l)
        })
        .collect();
    let d: Vec<f64> = barriers.windows(2).map(|w| barrier_levy_distance(&w[0], &w[1])).collect();
    Outcome {
        passed: d.windows(2).all(|w| w[1] < w[0]),
        detail: format!("d(b_n, b_2n) for n = 20, 40, 80, 160: {d:.5?}"),
    }
}

fn main() {
    let mut suite = Suite { results: Vec::new(), solved: Vec::new() };
    let secs = Duration::from_secs;
    suite.run(1, "closed-form first step", secs(1), closed_form_step);
    suite.run(2, "symmetric two-point laws", secs(1), symmetry);
    suite.run(3, "kernel conservation", secs(10), kernel_conservation);

    let exp = spec(r#"{"kind": "exponential", "rate": 1.0, "n": 100}"#);
    let mut reports = Vec::new();
    suite.run(4, "embedding fidelity, exponential n = 100", secs(120), |s| {
        let b = s.solve("exponential n=100", &exp);
        let (o, json) = exponential_embedding(&exp, &b);
        reports.push(json);
        o
    });
    suite.run(5, "E tau equals the second moment", secs(180), moment_identity);
    suite.run(6, "truncated expectations below Azema-Yor", secs(240), optimality);
    suite.run(7, "finiteness of the levels", secs(60), finiteness);
    suite.run(9, "barrier convergence", secs(120), convergence);
    suite.run(10, "determinism", secs(120), |s| {
        let b = solve(&exp, &SolverConfig::default()).unwrap().barrier;
        let same_barrier = s.solved.iter().any(|(label, _, first)| label == "exponential n=100" && *first == b);
        let (_, json) = exponential_embedding(&exp, &b);
        let identical = reports.first() == Some(&json);
        Outcome {
            passed: same_barrier && identical,
            detail: format!("barrier identical: {same_barrier}, report identical: {identical} ({} bytes)", json.len()),
        }
    });
    suite.run(8, "flat on atoms, jumps across gaps", secs(10), structure);

    suite.results.sort_by_key(|r| r.0);
    let mut all = true;
    println!();
    for (id, name, outcome, elapsed, limit) in &suite.results {
        let in_time = elapsed <= limit;
        let passed = outcome.passed && in_time;
        all &= passed;
        println!(
            "criterion {id:>2} [{}] {name}: {} ({:.2} s, limit {} s)",
            if passed { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!();
    if !all {
        std::process::exit(1);
    }
}
