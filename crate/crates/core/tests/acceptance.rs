//! One pass/fail line per acceptance criterion. Exits non-zero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use lgpac::constructions::{build_gamma, build_zeta, get};
use lgpac::dsl::{parse, parse_bytes, print};
use lgpac::frechet::{
    metric, metric_to_pseudonorm_bound, pseudonorm, pseudonorm_to_metric_bound, GridFunction, MetricConfig,
    PseudonormFamily, SpatialGrid,
};
use lgpac::limits::{
    check_fc_sequence, check_fc_stream, check_metric_sequence, check_metric_stream, continuous_limits,
    metric_to_pseudonorm_modulus, pseudonorm_to_metric_modulus, CertifiedLimit, Flavor, Lattice, Modulus,
    NetworkStream, PseudonormModulus,
};
use lgpac::network::BoundNetwork;
use lgpac::simulator::{simulate, Samples, SolverConfig, TimeGrid, TraceSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn grid_values(traces: &TraceSet, channel: &str) -> Vec<Vec<f64>> {
    match &traces.channel(channel).unwrap().samples {
        Samples::Grid(v) => v.clone(),
        Samples::Real(_) => panic!("{channel} is not function valued"),
    }
}

fn c1_inverter() -> Outcome {
    let start = Instant::now();
    let doc = get("inverter").unwrap().document;
    let traces = simulate(&doc.bound().unwrap(), &TimeGrid::uniform(10.0, 1001).unwrap(), &SolverConfig::default()).unwrap();
    let Samples::Real(a) = &traces.channel("a").unwrap().samples else { unreachable!() };
    let err = traces.times.iter().zip(a).map(|(t, v)| (v - 1.0 / (1.0 + t)).abs()).fold(0.0, f64::max);
    let el = start.elapsed();
    outcome(err < 1e-6 && within(el, 1.0), format!("max error {err:.2e} (< 1e-6), {:.3}s (< 1s)", el.as_secs_f64()))
}

fn c2_feedback() -> Outcome {
    let start = Instant::now();
    let doc = get("feedback").unwrap().document;
    let traces = simulate(&doc.bound().unwrap(), &TimeGrid::uniform(2.0, 201).unwrap(), &SolverConfig::default()).unwrap();
    let grid = traces.grid.clone().unwrap();
    let u4 = grid_values(&traces, "u4");
    let mut err = 0.0f64;
    for (i, t) in traces.times.iter().enumerate() {
        for (j, x) in grid.points().iter().enumerate() {
            err = err.max((u4[i][j] - x * (t * x).exp()).abs());
        }
    }
    let el = start.elapsed();
    outcome(err < 1e-5 && within(el, 1.0), format!("max error {err:.2e} (< 1e-5), {:.3}s (< 1s)", el.as_secs_f64()))
}

/// Γ from the Lanczos approximation in statrs, computed before any network
/// is built.
fn gamma_reference(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| statrs::function::gamma::gamma(x)).collect()
}

/// Σ_{n≤10⁶} n^{-x} plus the Euler–Maclaurin tail N^{1−x}/(x−1) − N^{−x}/2.
fn zeta_reference(x: f64) -> f64 {
    let n = 1_000_000u32;
    let partial: f64 = (1..=n).rev().map(|k| f64::from(k).powf(-x)).sum();
    let nf = f64::from(n);
    partial + nf.powf(1.0 - x) / (x - 1.0) - 0.5 * nf.powf(-x)
}

fn probe_limits(
    bound: BoundNetwork,
    channel: &str,
    modulus: &Modulus,
    taus: &[f64],
    first_index: u32,
) -> Vec<CertifiedLimit> {
    let grid = bound.system().grid().unwrap().clone();
    let family = PseudonormFamily::unit_intervals(grid, first_index).unwrap();
    let stream = NetworkStream::new(bound, channel, SolverConfig::default()).unwrap();
    continuous_limits(&stream, modulus, taus, Some(&family), &MetricConfig::default()).unwrap()
}

fn c3_c4_gamma() -> (Outcome, Outcome) {
    let xs = [1.0, 1.5, 2.0, 3.0, 4.0];
    let reference = gamma_reference(&xs);
    let start = Instant::now();
    let (net, modulus) = build_gamma(6.0).unwrap();
    let grid = Arc::new(SpatialGrid::uniform(1.0, Some(6.0), 6.0, 0.25).unwrap());
    let bound = BoundNetwork::new(&net, Some(grid.clone()), &Default::default()).unwrap();
    let taus = [4.0, 5.0, 6.0, 7.0, 8.0];
    let limits = probe_limits(bound, "gamma", &modulus, &taus, 1);
    let el = start.elapsed();

    let at8 = &limits[4];
    let g = at8.value.as_grid().unwrap();
    let tol = 2f64.powi(-8) + 1e-4;
    let worst = xs.iter().zip(&reference).map(|(x, r)| (g.at(*x).unwrap() - r).abs()).fold(0.0, f64::max);
    let c3 = outcome(
        worst < tol && at8.certified && within(el, 60.0),
        format!(
            "max |value - Gamma| {worst:.2e} (< {tol:.2e}), certified {}, horizon t={}, {:.2}s (< 60s)",
            at8.certified,
            at8.probes.1,
            el.as_secs_f64()
        ),
    );
    let gaps: Vec<String> = limits.iter().map(|l| format!("{}:{:.1e}", l.precision, l.empirical_gap)).collect();
    let c4 = outcome(limits.iter().all(|l| l.empirical_gap < l.bound), format!("gaps {} all below 2^-tau", gaps.join(" ")));
    (c3, c4)
}

fn c5_c6_zeta() -> (Outcome, Outcome) {
    let xs = [2.0, 3.0, 4.0];
    let reference: Vec<f64> = xs.iter().map(|&x| zeta_reference(x)).collect();
    let start = Instant::now();
    let (net, modulus) = build_zeta(6.0).unwrap();
    let grid = Arc::new(SpatialGrid::uniform(2.0, Some(6.0), 6.0, 0.25).unwrap());
    let bound = BoundNetwork::new(&net, Some(grid), &Default::default()).unwrap();
    let taus: Vec<f64> = (4..=16).map(f64::from).collect();
    let limits = probe_limits(bound, "zeta1", &modulus, &taus, 2);
    let el = start.elapsed();

    let at16 = limits.last().unwrap();
    let z = at16.value.as_grid().unwrap();
    let tol = 2f64.powi(-16) + 1e-5;
    let worst = xs.iter().zip(&reference).map(|(x, r)| (z.at(*x).unwrap() - r).abs()).fold(0.0, f64::max);
    let c5 = outcome(
        worst < tol && at16.certified && within(el, 10.0),
        format!(
            "max |value - zeta| {worst:.2e} (< {tol:.2e}), certified {}, horizon t={}, {:.2}s (< 10s)",
            at16.certified,
            at16.probes.1,
            el.as_secs_f64()
        ),
    );
    let failing: Vec<f64> = limits.iter().filter(|l| l.empirical_gap >= l.bound).map(|l| l.precision).collect();
    let largest = limits.iter().map(|l| l.empirical_gap / l.bound).fold(0.0, f64::max);
    let c6 = outcome(
        failing.is_empty(),
        format!("tau 4..=16, largest gap/bound ratio {largest:.2e}, failing {failing:?}"),
    );
    (c5, c6)
}

fn random_function(rng: &mut ChaCha8Rng, grid: &Arc<SpatialGrid>, scale: f64) -> GridFunction {
    let values = (0..grid.len()).map(|_| rng.random_range(-scale..scale)).collect();
    GridFunction::new(grid.clone(), values).unwrap()
}

fn shifted(f: &GridFunction, dir: &GridFunction, s: f64) -> GridFunction {
    let values = f.values().iter().zip(dir.values()).map(|(a, b)| a + s * b).collect();
    GridFunction::new(f.grid().clone(), values).unwrap()
}

fn c7_bounds() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let grid = Arc::new(SpatialGrid::uniform(1.0, Some(12.0), 12.0, 0.5).unwrap());
    let family = PseudonormFamily::unit_intervals(grid.clone(), 1).unwrap();
    let cfg = MetricConfig::default();
    let zero = GridFunction::constant(grid.clone(), 0.0).unwrap();
    let (mut first_ok, mut second_ok) = (0, 0);
    let mut failures = Vec::new();

    // d < ε·2⁻ᴹ forces ‖·‖ₙ < ε for n ≤ M
    while first_ok < 1000 {
        let eps = rng.random_range(1e-3..1.0);
        let m = rng.random_range(1..=12u32);
        let delta = metric_to_pseudonorm_bound(eps, m).unwrap();
        let x = random_function(&mut rng, &grid, 10.0);
        let dir = random_function(&mut rng, &grid, 1.0);
        let unit = metric(&zero, &dir, &family, &cfg).unwrap();
        let s = delta * rng.random_range(0.01..1.0) / unit;
        let y = shifted(&x, &dir, s);
        if metric(&x, &y, &family, &cfg).unwrap() >= delta {
            continue;
        }
        first_ok += 1;
        let diff = x.sub(&y).unwrap();
        for n in 1..=m {
            if pseudonorm(&diff, n, &family).unwrap() >= eps {
                failures.push(format!("first direction eps={eps} M={m} n={n}"));
            }
        }
    }

    // ‖·‖ₙ < ε/2 for n ≤ M with 2⁻ᴹ ≤ ε/2 forces d < ε
    while second_ok < 1000 {
        let eps = rng.random_range(2f64.powi(-10)..1.0);
        let (delta, m) = pseudonorm_to_metric_bound(eps).unwrap();
        let x = random_function(&mut rng, &grid, 10.0);
        let dir = random_function(&mut rng, &grid, 1.0);
        let reach = pseudonorm(&dir, m.min(family.last_index()), &family).unwrap();
        let s = delta * rng.random_range(0.01..1.0) / reach;
        let y = shifted(&x, &dir, s);
        let diff = x.sub(&y).unwrap();
        if (1..=m).any(|n| pseudonorm(&diff, n, &family).unwrap() >= delta) {
            continue;
        }
        second_ok += 1;
        let d = metric(&x, &y, &family, &cfg).unwrap();
        if d >= eps {
            failures.push(format!("second direction eps={eps} M={m} d={d}"));
        }
    }
    let el = start.elapsed();
    outcome(
        failures.is_empty() && within(el, 5.0),
        format!("{first_ok} + {second_ok} pairs, {} violations, {:.2}s (< 5s)", failures.len(), el.as_secs_f64()),
    )
}

fn c8_conversions() -> Outcome {
    let start = Instant::now();
    let grid = Arc::new(SpatialGrid::uniform(1.0, Some(6.0), 6.0, 0.25).unwrap());
    let family = PseudonormFamily::unit_intervals(grid.clone(), 1).unwrap();
    let cfg = MetricConfig::default();
    let lattice = Lattice { n_max: 6, precision_max: 10 };
    let (g1, g2) = (grid.clone(), grid.clone());
    // geometric tails: ‖g_i − g_j‖ₙ < n·2^-i and ‖u(s) − u(t)‖ₙ < n·e^-s
    let seq = move |k: u64| GridFunction::from_fn(g1.clone(), |x| (1.0 - (-(k as f64)).exp2()) * x).unwrap();
    let stream = move |t: f64| GridFunction::from_fn(g2.clone(), |x| (1.0 - (-t).exp()) * x).unwrap();
    let ln2 = std::f64::consts::LN_2;

    let mut results = Vec::new();

    let n_metric = Modulus::custom(Flavor::Discrete, |nu| nu + 1.0).unwrap();
    let base = check_metric_sequence(&seq, &n_metric, &family, &cfg, 10).unwrap();
    let conv = check_fc_sequence(&seq, &metric_to_pseudonorm_modulus(&n_metric), &family, lattice).unwrap();
    results.push(("N to N~", base.passed() && conv.passed(), base.checked + conv.checked));

    let t_metric = Modulus::custom(Flavor::Continuous, move |tau| (tau + 1.0) * ln2).unwrap();
    let base = check_metric_stream(&stream, &t_metric, &family, &cfg, 10).unwrap();
    let conv = check_fc_stream(&stream, &metric_to_pseudonorm_modulus(&t_metric), &family, lattice).unwrap();
    results.push(("T to T~", base.passed() && conv.passed(), base.checked + conv.checked));

    let n_fc = PseudonormModulus::custom(Flavor::Discrete, 1, |n, nu| nu + f64::from(n).log2().ceil()).unwrap();
    let base = check_fc_sequence(&seq, &n_fc, &family, lattice).unwrap();
    let conv = check_metric_sequence(&seq, &pseudonorm_to_metric_modulus(&n_fc), &family, &cfg, 10).unwrap();
    results.push(("N~ to N", base.passed() && conv.passed(), base.checked + conv.checked));

    let t_fc = PseudonormModulus::custom(Flavor::Continuous, 1, move |n, tau| (tau + 1.0 + f64::from(n).log2()) * ln2).unwrap();
    let base = check_fc_stream(&stream, &t_fc, &family, lattice).unwrap();
    let conv = check_metric_stream(&stream, &pseudonorm_to_metric_modulus(&t_fc), &family, &cfg, 10).unwrap();
    results.push(("T~ to T", base.passed() && conv.passed(), base.checked + conv.checked));

    let el = start.elapsed();
    let pass = results.iter().all(|r| r.1) && within(el, 5.0);
    let detail: Vec<String> = results.iter().map(|(n, ok, k)| format!("{n}: {} ({k} probes)", if *ok { "ok" } else { "FAIL" })).collect();
    outcome(pass, format!("{}, {:.2}s (< 5s)", detail.join(", "), el.as_secs_f64()))
}

fn c9_order() -> Outcome {
    let doc = get("inverter").unwrap().document;
    let bound = doc.bound().unwrap();
    let tg = TimeGrid::uniform(10.0, 11).unwrap();
    let err = |h: f64| {
        let traces = simulate(&bound, &tg, &SolverConfig::rk4(h)).unwrap();
        let Samples::Real(a) = &traces.channel("a").unwrap().samples else { unreachable!() };
        traces.times.iter().zip(a).map(|(t, v)| (v - 1.0 / (1.0 + t)).abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(0.1), err(0.05));
    let ratio = coarse / fine;
    outcome((8.0..=32.0).contains(&ratio), format!("error ratio {ratio:.2} (in [8, 32]) for h = 0.1 vs 0.05"))
}

fn c10_parser() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let alphabet: &[u8] = b"abcxt_019.-+*/^()[]{},;:=># \n\tinput const mul add integrator limit wire output bind grid modulus step \xc3\xa9\xff";
    let (mut crashes, mut unspanned) = (0, 0);
    for i in 0..10_000 {
        let len = rng.random_range(0..120);
        let bytes: Vec<u8> = (0..len)
            .map(|_| if i % 2 == 0 { rng.random() } else { alphabet[rng.random_range(0..alphabet.len())] })
            .collect();
        match catch_unwind(AssertUnwindSafe(|| parse_bytes(&bytes))) {
            Err(_) => crashes += 1,
            Ok(Ok(_)) => {}
            Ok(Err(diags)) => {
                let ok = !diags.is_empty()
                    && diags.iter().all(|d| {
                        let s = d.span;
                        s.line >= 1 && s.col_start >= 1 && s.col_start <= s.col_end && s.byte_start <= s.byte_end && s.byte_end <= bytes.len()
                    });
                if !ok {
                    unspanned += 1;
                }
            }
        }
    }
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut files = 0;
    let mut mismatched = Vec::new();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "lgpac") {
            files += 1;
            let text = std::fs::read_to_string(&path).unwrap();
            let identical = parse(&text).map(|doc| print(&doc) == text && parse(&print(&doc)) == Ok(doc)).unwrap_or(false);
            if !identical {
                mismatched.push(path.file_name().unwrap().to_string_lossy().into_owned());
            }
        }
    }
    let el = start.elapsed();
    outcome(
        crashes == 0 && unspanned == 0 && files > 0 && mismatched.is_empty(),
        format!(
            "10000 inputs: {crashes} crashes, {unspanned} unspanned failures; {files} shipped examples, not round-tripping: {mismatched:?}; {:.2}s",
            el.as_secs_f64()
        ),
    )
}

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let mut rows: Vec<(u32, &str, Outcome)> = Vec::new();
    let guarded = |f: &dyn Fn() -> Outcome| catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| outcome(false, "panicked"));
    rows.push((1, "inverter closed form", guarded(&c1_inverter)));
    rows.push((2, "feedback closed form", guarded(&c2_feedback)));
    match catch_unwind(c3_c4_gamma) {
        Ok((a, b)) => {
            rows.push((3, "gamma reproduction", a));
            rows.push((4, "gamma modulus bound", b));
        }
        Err(_) => {
            rows.push((3, "gamma reproduction", outcome(false, "panicked")));
            rows.push((4, "gamma modulus bound", outcome(false, "panicked")));
        }
    }
    match catch_unwind(c5_c6_zeta) {
        Ok((a, b)) => {
            rows.push((5, "zeta reproduction", a));
            rows.push((6, "zeta id-convergence", b));
        }
        Err(_) => {
            rows.push((5, "zeta reproduction", outcome(false, "panicked")));
            rows.push((6, "zeta id-convergence", outcome(false, "panicked")));
        }
    }
    rows.push((7, "pseudonorm/metric bounds", guarded(&c7_bounds)));
    rows.push((8, "modulus conversions", guarded(&c8_conversions)));
    rows.push((9, "RK4 order", guarded(&c9_order)));
    rows.push((10, "parser robustness", guarded(&c10_parser)));

    let mut failed = 0;
    for (n, name, o) in &rows {
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {n:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", rows.len() - failed, rows.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
