//! Acceptance gate. Each criterion prints one `PASS` or `FAIL` line; the
//! process exits nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use eseries::asymptotic::{fit_leading_coeffs, truncation_order_report, FitFamily};
use eseries::carleman::{
    finite_carleman_reports, margin_report, tightness_ranking, PowTable, SequenceSpec, WeightFamily,
};
use eseries::exact_coeffs::{b_series, d_conversion_series, d_recurrence_series, d_shift};
use eseries::integral_repr::{alzer_h, d_from_integral, g_density, g_mass, HRoute};
use eseries::quadrature::QuadratureConfig;
use eseries::{ExactRational, PrecisionContext, Real};

struct Outcome {
    pass: bool,
    detail: String,
}

fn q(p: i64, d: i64) -> ExactRational {
    ExactRational::ratio(p, d)
}

fn ctx() -> PrecisionContext {
    PrecisionContext::new(256).expect("valid precision")
}

fn tol12(c: &PrecisionContext) -> Real {
    c.rational(&q(1, 1_000_000_000_000))
}

fn within_time(elapsed: Duration, limit_secs: u64, failures: &mut Vec<String>) {
    if elapsed > Duration::from_secs(limit_secs) {
        failures.push(format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64()));
    }
}

fn finish(failures: Vec<String>, ok_detail: String) -> Outcome {
    if failures.is_empty() {
        Outcome { pass: true, detail: ok_detail }
    } else {
        Outcome { pass: false, detail: failures.join("; ") }
    }
}

fn exact_b_values() -> Outcome {
    let start = Instant::now();
    let printed = [q(1, 2), q(1, 24), q(1, 48), q(73, 5760), q(11, 1280), q(1945, 580608)];
    let b = b_series(6);
    let mut failures: Vec<String> = (1..=6)
        .filter(|&k| b[k] != printed[k - 1])
        .map(|k| format!("b_{k} = {} but expected {}", b[k], printed[k - 1]))
        .collect();
    within_time(start.elapsed(), 1, &mut failures);
    finish(failures, "b_1..b_6 match".into())
}

fn exact_d_values() -> Outcome {
    let start = Instant::now();
    let printed = [q(1, 2), q(0, 1), q(5, 288), q(139, 17280), q(119, 23040)];
    let conversion = d_conversion_series(200);
    let recurrence = d_recurrence_series(200);
    let mut failures = Vec::new();
    for (k, expected) in printed.iter().enumerate() {
        for (route, values) in [("conversion", &conversion), ("recurrence", &recurrence)] {
            if values[k] != *expected {
                failures.push(format!("{route} d_{} = {} but expected {expected}", k + 1, values[k]));
            }
        }
    }
    if let Some(n) = (1..=200).find(|&n| conversion[n - 1] != recurrence[n - 1]) {
        failures.push(format!("routes disagree at n = {n}"));
    }
    within_time(start.elapsed(), 5, &mut failures);
    finish(failures, "d_1..d_5 match on both routes; routes agree on 1..=200".into())
}

fn integral_route() -> Outcome {
    let start = Instant::now();
    let c = ctx();
    let cfg = QuadratureConfig::standard(&c);
    let tol = tol12(&c);
    let exact = d_recurrence_series(12);
    let mut failures = Vec::new();
    let mut worst = c.zero();
    for n in 2..=12 {
        match d_from_integral(n, &cfg, &c) {
            Ok(r) => {
                let diff = (&r.value - c.rational(&exact[n - 1])).abs();
                if diff >= tol {
                    failures.push(format!("d_{n} off by {}", diff.to_decimal(3)));
                }
                worst = worst.max(&diff).clone();
            }
            Err(e) => failures.push(format!("d_{n}: {e}")),
        }
    }
    match g_mass(&cfg, &c) {
        Ok(r) => {
            let diff = (r.value - c.e() / 24).abs();
            if diff >= tol {
                failures.push(format!("g mass off by {}", diff.to_decimal(3)));
            }
        }
        Err(e) => failures.push(format!("g mass: {e}")),
    }
    for x in [1i64, 2, 10, 100] {
        let xr = c.int(x);
        match (
            alzer_h(&xr, HRoute::Direct, &cfg, &c),
            alzer_h(&xr, HRoute::Integral, &cfg, &c),
        ) {
            (Ok(a), Ok(b)) => {
                let diff = (a - b).abs();
                if diff >= tol {
                    failures.push(format!("h({x}) routes differ by {}", diff.to_decimal(3)));
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("h({x}): {e}")),
        }
    }
    within_time(start.elapsed(), 30, &mut failures);
    finish(
        failures,
        format!("max |d_n error| {} for n = 2..12; g mass and h identity within 1e-12", worst.to_decimal(3)),
    )
}

fn fitting_experiments() -> Outcome {
    let start = Instant::now();
    let c = ctx();
    let mut failures = Vec::new();
    let mut roots = Vec::new();
    for family in [FitFamily::C, FitFamily::D] {
        let report = match fit_leading_coeffs(family, &family.default_params(), &c) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("{}-fit: {e}", family.name()));
                continue;
            }
        };
        for s in &report.samples {
            let expected = family.reference_dominant(&s.param);
            let diff = (&s.dominant - c.rational(&expected)).abs().to_f64();
            let ok = if expected.is_zero() {
                diff < 1e-12
            } else {
                diff <= 0.01 * expected.abs().to_f64()
            };
            if !ok {
                failures.push(format!(
                    "{}-fit dominant at {} is {}, expected {expected}",
                    family.name(),
                    s.param,
                    s.dominant.to_decimal(6)
                ));
            }
        }
        let root_diff = (&report.root - c.rational(&family.reference_root())).abs().to_f64();
        if root_diff > 1e-6 {
            failures.push(format!("{}-fit root off by {root_diff:e}", family.name()));
        }
        roots.push(format!("{}-fit root {}", family.name(), report.root.to_decimal(10)));
    }
    within_time(start.elapsed(), 60, &mut failures);
    finish(failures, roots.join(", "))
}

fn truncation_orders() -> Outcome {
    let c = ctx();
    let cases = [
        (ExactRational::one(), 1usize, 2.0),
        (d_shift(), 1, 3.0),
        (d_shift(), 3, 4.0),
        (d_shift(), 4, 5.0),
    ];
    let mut failures = Vec::new();
    let mut measured = Vec::new();
    for (eps, k, expected) in cases {
        match truncation_order_report(&eps, k, &c) {
            Ok(r) => {
                let p = r.exponent.to_f64();
                measured.push(format!("(eps {eps}, K {k}) -> {p:.4}"));
                if (p - expected).abs() > 0.05 {
                    failures.push(format!("eps {eps}, K {k}: exponent {p:.4}, expected {expected:.2}"));
                }
            }
            Err(e) => failures.push(format!("eps {eps}, K {k}: {e}")),
        }
    }
    finish(failures, measured.join(", "))
}

fn carleman_suite() -> Outcome {
    let c = ctx();
    let mut failures = Vec::new();
    let table = match PowTable::new(100_000, &c) {
        Ok(t) => t,
        Err(e) => return finish(vec![format!("power table: {e}")], String::new()),
    };
    let mut families = vec![
        WeightFamily::ClassicalE,
        WeightFamily::BichengDebnath,
        WeightFamily::PingGuozheng,
        WeightFamily::yang_default(),
    ];
    families.extend((1..=5).map(WeightFamily::BSeries));
    families.extend((1..=5).map(WeightFamily::DSeries));
    for f in &families {
        match margin_report(f, &table, &c) {
            Ok(r) if r.holds() => {}
            Ok(r) => failures.push(format!("{f}: margin {} at n = {}", r.min_margin.to_decimal(4), r.argmin)),
            Err(e) => failures.push(format!("{f}: {e}")),
        }
    }

    let representative = [WeightFamily::ClassicalE, WeightFamily::BichengDebnath, WeightFamily::DSeries(3)];
    let prefix = table.prefix(10_000).expect("table covers 10^4");
    let mut report_count = 0;
    for seq in SequenceSpec::defaults() {
        match finite_carleman_reports(&seq, &representative, &prefix, &c) {
            Ok(reports) => {
                for r in reports {
                    report_count += 1;
                    if !r.holds() {
                        failures.push(format!("{} / {}: lhs >= rhs", r.family, r.sequence));
                    }
                    if r.family == WeightFamily::ClassicalE && seq == SequenceSpec::default_geometric() {
                        let two = c.int(2);
                        let limit = (&two - two.sqrt()).recip();
                        let diff = (&r.lhs - limit).abs().to_f64();
                        if diff >= 1e-8 {
                            failures.push(format!("geometric lhs off by {diff:e}"));
                        }
                    }
                }
            }
            Err(e) => failures.push(format!("{seq}: {e}")),
        }
    }

    match tightness_ranking(&[WeightFamily::BichengDebnath, WeightFamily::DSeries(3)], 1000, &c) {
        Ok(r) if r[0].family == WeightFamily::DSeries(3) => {}
        Ok(r) => failures.push(format!("ranking leader is {}", r[0].family)),
        Err(e) => failures.push(format!("ranking: {e}")),
    }
    finish(
        failures,
        format!(
            "{} families positive on 1..=100000; {report_count} finite reports hold; d-series:3 ranks above bicheng-debnath",
            families.len()
        ),
    )
}

fn cli_output(args: &[&str], workers: usize) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_eseries"))
        .args(args)
        .args(["--workers", &workers.to_string()])
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn property_suites() -> Outcome {
    let c = ctx();
    let mut failures = Vec::new();

    let conversion = d_conversion_series(200);
    if conversion != d_recurrence_series(200) {
        failures.push("route agreement on 1..=200".into());
    }
    let b = b_series(200);
    if let Some(n) = (1..=200).find(|&n| !b[n].is_positive()) {
        failures.push(format!("b_{n} not positive"));
    }
    if let Some(n) = (1..=200).filter(|&n| n != 2).find(|&n| !conversion[n - 1].is_positive()) {
        failures.push(format!("d_{n} not positive"));
    }

    let ulps = c.one().ldexp(-(c.mantissa_bits() as i32 - 3));
    for k in 0..=1000i64 {
        let s = c.rational(&q(k, 1000));
        let mirror = c.rational(&q(1000 - k, 1000));
        let (a, b) = (g_density(&s, &c).expect("in range"), g_density(&mirror, &c).expect("in range"));
        if (&a - &b).abs() > ulps {
            failures.push(format!("g not symmetric at s = {k}/1000"));
            break;
        }
    }

    let commands: [&[&str]; 7] = [
        &["coeffs", "--route", "d-conversion", "--max", "40"],
        &["verify", "--max", "60", "--format", "json"],
        &["quad", "--target", "d", "--n", "5"],
        &["order", "--experiment", "shift-compare", "--k", "1", "--format", "json"],
        &["order", "--experiment", "d-fit"],
        &["carleman", "--family", "d-series", "--K", "3", "--seq", "power-decay:2", "--N", "500"],
        &["carleman", "--rank", "classical,bicheng-debnath,d-series:3", "--N", "300", "--format", "json"],
    ];
    let mut runs = 0;
    for args in commands {
        let (code, reference) = cli_output(args, 1);
        if code != 0 {
            failures.push(format!("`{}` exited with {code}", args.join(" ")));
            continue;
        }
        for workers in [1, 2, 4] {
            runs += 1;
            if cli_output(args, workers) != (code, reference.clone()) {
                failures.push(format!("`{}` differs with {workers} workers", args.join(" ")));
            }
        }
    }
    finish(
        failures,
        format!("route agreement, positivity, g symmetry on 1001 points; {runs} repeated CLI runs byte-identical"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("exact b-values", exact_b_values),
        ("exact d-values by both routes", exact_d_values),
        ("integral route", integral_route),
        ("fitting experiments", fitting_experiments),
        ("truncation orders", truncation_orders),
        ("Carleman suite", carleman_suite),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {} {status}: {name} [{:.2}s] {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        failed += usize::from(!outcome.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
