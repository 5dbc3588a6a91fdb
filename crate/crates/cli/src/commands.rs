use eseries::asymptotic::{
    expected_truncation_exponent, fit_leading_coeffs, truncation_order_report, FitFamily, TRUNCATION_RANGE,
};
use eseries::carleman::{
    finite_carleman_reports, pointwise_margin, tightness_ranking, PowTable, SequenceSpec, WeightFamily,
};
use eseries::exact_coeffs::{
    a_coeff, b_series, coefficient_table, d_conversion_series, d_recurrence_series, log_g_coeff, Route,
};
use eseries::integral_repr::{alzer_h, alzer_h_integral, d_from_integral, g_mass, HRoute};
use eseries::quadrature::{QuadratureConfig, QuadratureRule, QuadratureResult};
use eseries::{Error, ExactRational, PrecisionContext, Real, Result};

use crate::args::{CarlemanArgs, Experiment, GlobalArgs, QuadTarget};
use crate::report::{Cell, Fields, Report};

/// Settings shared by every command, echoed into each report header.
pub struct RunConfig {
    pub ctx: PrecisionContext,
    pub tolerance: ExactRational,
    pub digits: usize,
    pub format: &'static str,
}

impl RunConfig {
    pub fn from_args(args: &GlobalArgs) -> Result<Self> {
        let tolerance: ExactRational = args.tolerance.parse()?;
        if !tolerance.is_positive() {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", args.tolerance)));
        }
        let ctx = PrecisionContext::new(args.precision_bits)?.with_tolerance(&tolerance)?;
        Ok(Self {
            ctx,
            tolerance,
            digits: args.digits.max(1),
            format: args.format.name(),
        })
    }

    fn header(&self, extra: Fields) -> Fields {
        let mut fields: Fields = vec![
            ("precision_bits".into(), self.ctx.mantissa_bits().into()),
            ("format".into(), self.format.into()),
            ("tolerance".into(), self.tolerance.to_string().into()),
            ("digits".into(), self.digits.into()),
        ];
        fields.extend(extra);
        fields
    }

    fn tol(&self) -> Real {
        self.ctx.rational(&self.tolerance)
    }

    fn real(&self, x: &Real) -> Cell {
        x.to_decimal(self.digits).into()
    }

    /// Fixed-point with `digits` places after the point.
    fn rational_decimal(&self, q: &ExactRational) -> Cell {
        q.to_decimal(self.digits).into()
    }

    /// Quadrature runs two orders of magnitude below the reporting tolerance.
    fn quadrature(&self, rule: QuadratureRule) -> Result<QuadratureConfig> {
        let inner = self.ctx.rational(&(&self.tolerance / ExactRational::from(100)));
        QuadratureConfig::standard(&self.ctx).with_rule(rule).with_tolerance(inner)
    }
}

fn field(key: &str, value: impl Into<Cell>) -> (String, Cell) {
    (key.to_string(), value.into())
}

pub fn coeffs(cfg: &RunConfig, route: &str, max: usize) -> Result<Report> {
    let route: Route = route.parse()?;
    let table = coefficient_table(route, max);
    let mut report = Report::new(
        "coeffs",
        cfg.header(vec![field("route", route.name()), field("max", max)]),
        &["index", "value", "decimal"],
    );
    for (index, value) in &table.entries {
        report.push_row(vec![(*index).into(), value.to_string().into(), cfg.rational_decimal(value)]);
    }
    Ok(report)
}

struct Check {
    name: &'static str,
    range: String,
    checked: usize,
    failures: Vec<(usize, String, String)>,
}

/// Route agreement, positivity and the a/log-g identity on `1..=max`.
pub fn verify(cfg: &RunConfig, max: usize, corruption: Option<usize>) -> Result<Report> {
    if max == 0 {
        return Err(Error::Domain("verify needs --max >= 1".into()));
    }
    let conversion = d_conversion_series(max);
    let mut recurrence = d_recurrence_series(max);
    if let Some(i) = corruption {
        if i == 0 || i > max {
            return Err(Error::Domain(format!("corruption index {i} is outside 1..={max}")));
        }
        recurrence[i - 1] = &recurrence[i - 1] + ExactRational::ratio(1, 1_000_000_000);
    }

    let mut checks = Vec::new();
    let agreement = (1..=max)
        .filter(|&n| conversion[n - 1] != recurrence[n - 1])
        .map(|n| (n, recurrence[n - 1].to_string(), conversion[n - 1].to_string()))
        .collect();
    checks.push(Check {
        name: "d-route-agreement",
        range: format!("1..={max}"),
        checked: max,
        failures: agreement,
    });

    let b = b_series(max);
    checks.push(Check {
        name: "b-positive",
        range: format!("1..={max}"),
        checked: max,
        failures: (1..=max)
            .filter(|&n| !b[n].is_positive())
            .map(|n| (n, b[n].to_string(), "> 0".into()))
            .collect(),
    });

    let d_indices: Vec<usize> = (1..=max).filter(|&n| n != 2).collect();
    checks.push(Check {
        name: "d-positive",
        range: if max >= 3 { format!("{{1}} u 3..={max}") } else { "{1}".into() },
        checked: d_indices.len(),
        failures: d_indices
            .iter()
            .filter(|&&n| !conversion[n - 1].is_positive())
            .map(|&n| (n, conversion[n - 1].to_string(), "> 0".into()))
            .collect(),
    });
    if max >= 2 {
        checks.push(Check {
            name: "d2-vanishes",
            range: "2".into(),
            checked: 1,
            failures: if conversion[1].is_zero() {
                Vec::new()
            } else {
                vec![(2, conversion[1].to_string(), "0".into())]
            },
        });
    }

    checks.push(Check {
        name: "a-log-g-identity",
        range: format!("0..={max}"),
        checked: max + 1,
        failures: (0..=max)
            .filter_map(|n| {
                let a = a_coeff(n);
                let scaled = ExactRational::from(n as i64 + 1) * log_g_coeff(n + 1);
                (a != scaled).then(|| (n, a.to_string(), scaled.to_string()))
            })
            .collect(),
    });

    let mut report = Report::new(
        "verify",
        cfg.header(vec![field("max", max)]),
        &["check", "range", "checked", "failures", "status"],
    );
    for check in &checks {
        let ok = check.failures.is_empty();
        report.pass &= ok;
        report.push_row(vec![
            check.name.into(),
            check.range.clone().into(),
            check.checked.into(),
            check.failures.len().into(),
            (if ok { "pass" } else { "fail" }).into(),
        ]);
        for (index, left, right) in &check.failures {
            report.failures.push(vec![
                field("check", check.name),
                field("index", *index),
                field("value", left.clone()),
                field("reference", right.clone()),
            ]);
        }
    }
    Ok(report)
}

pub fn quad(cfg: &RunConfig, target: QuadTarget, n: usize, x: &str, rule: &str) -> Result<Report> {
    let rule: QuadratureRule = rule.parse()?;
    let qcfg = cfg.quadrature(rule)?;
    let ctx = &cfg.ctx;
    let (name, mut extra, result, reference, reference_text): (&str, Fields, QuadratureResult, Real, String) = match target {
        QuadTarget::GMass => {
            let r = g_mass(&qcfg, ctx)?;
            ("g-mass", Vec::new(), r, ctx.e() / 24, "e/24".into())
        }
        QuadTarget::H => {
            let xq: ExactRational = x.parse()?;
            if !xq.is_positive() {
                return Err(Error::Domain(format!("h needs x > 0, got {xq}")));
            }
            let xr = ctx.rational(&xq);
            let r = alzer_h_integral(&xr, &qcfg, ctx)?;
            let direct = alzer_h(&xr, HRoute::Direct, &qcfg, ctx)?;
            ("h", vec![field("x", xq.to_string())], r, direct, "(x+1)(e-(1+1/x)^x)".into())
        }
        QuadTarget::D => {
            let r = d_from_integral(n, &qcfg, ctx)?;
            let exact = d_conversion_series(n)[n - 1].clone();
            ("d", vec![field("n", n)], r, ctx.rational(&exact), exact.to_string())
        }
    };
    extra.insert(0, field("target", name));
    extra.push(field("rule", rule.name()));
    let diff = (&result.value - &reference).abs();
    let mut report = Report::new(
        "quad",
        cfg.header(extra),
        &["target", "value", "error_estimate", "reference", "abs_diff", "nodes", "levels"],
    );
    report.push_row(vec![
        name.into(),
        cfg.real(&result.value),
        cfg.real(&result.error_estimate),
        cfg.real(&reference),
        cfg.real(&diff),
        result.nodes_used.into(),
        result.levels.into(),
    ]);
    report.expected.push(field("reference", reference_text));
    report.expected.push(field("abs_diff_below", cfg.tolerance.to_string()));
    report.pass = diff < cfg.tol();
    Ok(report)
}

const EXPONENT_TOLERANCE: f64 = 0.05;
const ROOT_TOLERANCE: f64 = 1e-6;
const DOMINANT_RELATIVE_TOLERANCE: f64 = 0.01;

pub fn order(cfg: &RunConfig, experiment: Experiment, k: usize) -> Result<Report> {
    match experiment {
        Experiment::ShiftCompare => shift_compare(cfg, k),
        Experiment::CFit => fit(cfg, FitFamily::C),
        Experiment::DFit => fit(cfg, FitFamily::D),
    }
}

fn shift_compare(cfg: &RunConfig, k: usize) -> Result<Report> {
    let mut report = Report::new(
        "order",
        cfg.header(vec![
            field("experiment", "shift-compare"),
            field("k", k),
            field("sample_range", format!("{}..={}", TRUNCATION_RANGE.0, TRUNCATION_RANGE.1)),
        ]),
        &["shift", "depth", "exponent", "expected_exponent", "limit_constant", "status"],
    );
    for shift in [ExactRational::one(), eseries::exact_coeffs::d_shift()] {
        let estimate = truncation_order_report(&shift, k, &cfg.ctx)?;
        let expected = expected_truncation_exponent(&shift, k)
            .ok_or_else(|| Error::NonConvergence(format!("no nonzero coefficient after depth {k}")))?;
        let ok = (estimate.exponent.to_f64() - expected as f64).abs() <= EXPONENT_TOLERANCE;
        report.pass &= ok;
        report.push_row(vec![
            shift.to_string().into(),
            k.into(),
            estimate.exponent.to_decimal(8).into(),
            expected.into(),
            cfg.real(&estimate.limit_constant),
            (if ok { "pass" } else { "fail" }).into(),
        ]);
    }
    report.expected.push(field("exponent_tolerance", EXPONENT_TOLERANCE.to_string()));
    Ok(report)
}

fn fit(cfg: &RunConfig, family: FitFamily) -> Result<Report> {
    let ctx = &cfg.ctx;
    let fit = fit_leading_coeffs(family, &family.default_params(), ctx)?;
    let mut report = Report::new(
        "order",
        cfg.header(vec![field("experiment", format!("{}-fit", family.name()))]),
        &["param", "dominant", "expected_dominant", "next", "expected_next", "status"],
    );
    for sample in &fit.samples {
        let expected = family.reference_dominant(&sample.param);
        let expected_r = ctx.rational(&expected);
        let diff = (&sample.dominant - &expected_r).abs().to_f64();
        let ok = if expected.is_zero() {
            diff <= ctx.comparison_tolerance().to_f64()
        } else {
            diff <= DOMINANT_RELATIVE_TOLERANCE * expected.abs().to_f64()
        };
        report.pass &= ok;
        report.push_row(vec![
            sample.param.to_string().into(),
            cfg.real(&sample.dominant),
            expected.to_string().into(),
            cfg.real(&sample.next),
            family.reference_next(&sample.param).to_string().into(),
            (if ok { "pass" } else { "fail" }).into(),
        ]);
    }
    let reference_root = family.reference_root();
    let root_diff = (&fit.root - ctx.rational(&reference_root)).abs();
    report.pass &= root_diff.to_f64() <= ROOT_TOLERANCE;
    report.result = vec![
        field("order", fit.order as i64),
        field("root", fit.root.to_decimal(cfg.digits)),
        field("root_abs_diff", root_diff.to_decimal(cfg.digits)),
        field("bracket", format!("[{}, {}]", fit.bracket.0, fit.bracket.1)),
        field("bisection_steps", fit.bisection_steps),
    ];
    report.expected = vec![
        field("root", reference_root.to_string()),
        field("root_tolerance", ROOT_TOLERANCE.to_string()),
        field("dominant_relative_tolerance", DOMINANT_RELATIVE_TOLERANCE.to_string()),
    ];
    Ok(report)
}

/// Resolves `--family` together with `--K` and `--c`.
pub fn resolve_family(args: &CarlemanArgs) -> Result<WeightFamily> {
    let name = args.family.trim();
    let spelled = match (name, args.depth, &args.c) {
        ("b-series" | "d-series", Some(k), _) => format!("{name}:{k}"),
        ("yang", _, Some(c)) => format!("yang:{c}"),
        _ => name.to_string(),
    };
    spelled.parse()
}

pub fn carleman(cfg: &RunConfig, args: &CarlemanArgs) -> Result<Report> {
    let ctx = &cfg.ctx;
    if let Some(list) = &args.rank {
        let families = list
            .split(',')
            .map(str::parse::<WeightFamily>)
            .collect::<Result<Vec<_>>>()?;
        let ranking = tightness_ranking(&families, args.terms, ctx)?;
        let mut report = Report::new(
            "carleman",
            cfg.header(vec![field("mode", "rank"), field("families", list.clone()), field("N", args.terms)]),
            &["rank", "family", "total_slack", "min_margin", "argmin"],
        );
        for (i, r) in ranking.iter().enumerate() {
            report.pass &= r.holds();
            report.push_row(vec![
                (i + 1).into(),
                r.family.label().into(),
                cfg.real(&r.total_slack),
                cfg.real(&r.min_margin),
                r.argmin.into(),
            ]);
        }
        return Ok(report);
    }

    let family = resolve_family(args)?;
    if args.margin {
        let r = pointwise_margin(&family, args.max, ctx)?;
        let mut report = Report::new(
            "carleman",
            cfg.header(vec![field("mode", "margin"), field("family", family.label()), field("max", args.max)]),
            &["family", "max", "min_margin", "argmin", "total_slack"],
        );
        report.push_row(vec![
            family.label().into(),
            args.max.into(),
            cfg.real(&r.min_margin),
            r.argmin.into(),
            cfg.real(&r.total_slack),
        ]);
        report.expected.push(field("min_margin", "> 0"));
        report.pass = r.holds();
        return Ok(report);
    }

    let seq: SequenceSpec = args.seq.parse()?;
    let table = PowTable::new(args.terms, ctx)?;
    let r = finite_carleman_reports(&seq, std::slice::from_ref(&family), &table, ctx)?.remove(0);
    let mut report = Report::new(
        "carleman",
        cfg.header(vec![
            field("mode", "report"),
            field("family", family.label()),
            field("seq", seq.to_string()),
            field("N", args.terms),
        ]),
        &["family", "seq", "N", "lhs", "rhs", "min_margin", "argmin", "holds"],
    );
    let holds = r.holds() && r.min_margin.is_positive();
    report.push_row(vec![
        family.label().into(),
        seq.to_string().into(),
        args.terms.into(),
        cfg.real(&r.lhs),
        cfg.real(&r.rhs),
        cfg.real(&r.min_margin),
        r.margin_argmin.into(),
        holds.into(),
    ]);
    report.expected.push(field("lhs_below_rhs", true));
    report.expected.push(field("min_margin", "> 0"));
    report.pass = holds;
    Ok(report)
}
