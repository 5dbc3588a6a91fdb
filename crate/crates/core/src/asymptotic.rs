//! Extended-precision evaluation of `(1 + 1/x)^x`, its truncated shifted
//! expansions, and empirical convergence-order measurement.
//!
//! The relative error of a truncated approximant is measured through
//! `w_n = ln (1 + 1/n)^n - ln approx(n)`. If `n^k (w_n - w_{n+1}) -> l`
//! with `k > 1`, then `n^(k-1) w_n -> l / (k - 1)`; [`difference_order_probe`]
//! estimates both limits by Richardson extrapolation over `n, 2n, 4n, ...`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exact_coeffs::{b_series, d_conversion_series, d_shift, shifted_coefficients};
use crate::rational::ExactRational;
use crate::real::{PrecisionContext, Real};

/// One truncation `e (1 - sum_{k<=K} c_k / (x + shift)^k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionSpec {
    shift: ExactRational,
    coefficients: Vec<ExactRational>,
}

impl ExpansionSpec {
    pub fn new(shift: ExactRational, coefficients: Vec<ExactRational>) -> Result<Self> {
        if !shift.is_positive() || shift > 1 {
            return Err(Error::Domain(format!("shift {shift} is outside (0, 1]")));
        }
        Ok(Self { shift, coefficients })
    }

    /// `b_1..b_depth` around `x + 1`.
    pub fn b_series(depth: usize) -> Self {
        let b = b_series(depth);
        Self {
            shift: ExactRational::one(),
            coefficients: b[1..].to_vec(),
        }
    }

    /// `d_1..d_depth` around `x + 11/12`.
    pub fn d_series(depth: usize) -> Self {
        Self {
            shift: d_shift(),
            coefficients: d_conversion_series(depth),
        }
    }

    /// The exact expansion around `x + shift`, truncated at `depth`.
    pub fn for_shift(shift: ExactRational, depth: usize) -> Result<Self> {
        let coefficients = shifted_coefficients(&shift, depth);
        Self::new(shift, coefficients)
    }

    pub fn shift(&self) -> &ExactRational {
        &self.shift
    }

    pub fn coefficients(&self) -> &[ExactRational] {
        &self.coefficients
    }

    pub fn depth(&self) -> usize {
        self.coefficients.len()
    }

    /// `1 - sum c_k / (x + shift)^k` in exact arithmetic.
    pub fn bracket_exact(&self, x: &ExactRational) -> Result<ExactRational> {
        let base = x + &self.shift;
        let t = base.recip()?;
        let mut acc = ExactRational::zero();
        for c in self.coefficients.iter().rev() {
            acc = (acc + c) * &t;
        }
        Ok(ExactRational::one() - acc)
    }

    /// `1 - sum c_k / (x + shift)^k` by Horner in `1/(x + shift)`.
    pub fn bracket(&self, x: &Real, ctx: &PrecisionContext) -> Real {
        let t = (x + ctx.rational(&self.shift)).recip();
        let mut acc = ctx.zero();
        for c in self.coefficients.iter().rev() {
            acc = (acc + ctx.rational(c)) * &t;
        }
        ctx.one() - acc
    }
}

fn require_positive(x: &Real) -> Result<()> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("x must be positive, got {}", x.to_decimal(12))));
    }
    Ok(())
}

/// `(1 + 1/x)^x = exp(x ln(1 + 1/x))` at the context precision.
pub fn pow_expr(x: &Real, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(x)?;
    Ok(log_pow_expr(x, ctx).exp())
}

pub fn pow_expr_at(n: u64, ctx: &PrecisionContext) -> Real {
    log_pow_expr(&ctx.uint(n), ctx).exp()
}

/// `x ln(1 + 1/x)`.
fn log_pow_expr(x: &Real, ctx: &PrecisionContext) -> Real {
    (ctx.one() + x.recip()).ln() * x
}

/// `e (1 - sum_{k<=K} c_k / (x + shift)^k)`; `K = 0` gives `e`.
pub fn eval_truncated(x: &Real, spec: &ExpansionSpec, ctx: &PrecisionContext) -> Result<Real> {
    require_positive(x)?;
    Ok(ctx.e() * spec.bracket(x, ctx))
}

/// `w_n` with `(1 + 1/n)^n = approx(n) exp(w_n)`.
pub fn relative_error_seq(n: u64, spec: &ExpansionSpec, ctx: &PrecisionContext) -> Result<Real> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let x = ctx.uint(n);
    omega_with_truth(n, &log_pow_expr(&x, ctx), spec, ctx)
}

fn omega_with_truth(n: u64, log_truth: &Real, spec: &ExpansionSpec, ctx: &PrecisionContext) -> Result<Real> {
    let bracket = spec.bracket(&ctx.uint(n), ctx);
    if !bracket.is_positive() {
        return Err(Error::NonPositiveApproximant(n));
    }
    // ln(e * bracket) = 1 + ln(bracket)
    Ok(log_truth - ctx.one() - bracket.ln())
}

/// Caches `n ln(1 + 1/n)` so many specs can share one sampling grid.
#[derive(Debug, Default)]
struct TruthCache {
    log_truth: HashMap<u64, Real>,
}

impl TruthCache {
    fn omega(&mut self, n: u64, spec: &ExpansionSpec, ctx: &PrecisionContext) -> Result<Real> {
        if n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        let log_truth = self
            .log_truth
            .entry(n)
            .or_insert_with(|| log_pow_expr(&ctx.uint(n), ctx));
        omega_with_truth(n, log_truth, spec, ctx)
    }
}

#[derive(Clone, Debug)]
pub struct OrderEstimate {
    pub exponent: Real,
    pub limit_constant: Real,
    pub sample_range: (u64, u64),
}

#[derive(Clone, Debug)]
pub struct DifferenceEstimate {
    /// `l = lim n^k (w_n - w_{n+1})`.
    pub difference_limit: Real,
    /// `lim n^(k-1) w_n`, measured directly.
    pub scaled_limit: Real,
    /// `lim n (n^k (w_n - w_{n+1}) - l)`: the next coefficient of the
    /// difference expansion.
    pub next_coefficient: Real,
    /// `exponent = k - 1`, `limit_constant = l / (k - 1)`.
    pub estimate: OrderEstimate,
    /// Whether `scaled_limit` matches `l / (k - 1)` within the context tolerance.
    pub consistent: bool,
}

/// Richardson extrapolation of samples taken at `n, 2n, 4n, ...` for a
/// sequence with an expansion in integer powers of `1/n`. Returns the
/// diagonal of the tableau; its last entry is the best estimate.
pub fn richardson_diagonal(samples: &[Real]) -> Vec<Real> {
    let mut row: Vec<Real> = Vec::with_capacity(samples.len());
    let mut diagonal = Vec::with_capacity(samples.len());
    for sample in samples {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(sample.clone());
        for (m, prev) in row.iter().enumerate() {
            let factor = (1i64 << (m + 1)) - 1;
            let current: &Real = &next[m];
            let refined = current + &((current - prev) / factor);
            next.push(refined);
        }
        diagonal.push(next.last().expect("nonempty").clone());
        row = next;
    }
    diagonal
}

fn geometric_samples(range: (u64, u64)) -> Vec<u64> {
    let (n_min, n_max) = range;
    let mut out = Vec::new();
    let mut n = n_min;
    while n <= n_max {
        out.push(n);
        match n.checked_mul(2) {
            Some(next) => n = next,
            None => break,
        }
    }
    out
}

fn validate_range(range: (u64, u64), min_samples: usize) -> Result<Vec<u64>> {
    let (n_min, n_max) = range;
    if n_min == 0 || n_min >= n_max {
        return Err(Error::Domain(format!("degenerate sample range ({n_min}, {n_max})")));
    }
    let samples = geometric_samples(range);
    if samples.len() < min_samples {
        return Err(Error::Domain(format!(
            "range ({n_min}, {n_max}) gives {} geometric samples, need at least {min_samples}",
            samples.len()
        )));
    }
    Ok(samples)
}

/// `n^k`, exact for integral `k`.
fn power(n: u64, k: &Real, ctx: &PrecisionContext) -> Real {
    let base = ctx.uint(n);
    match k.to_rational() {
        Ok(q) if q.is_integer() && !q.is_negative() && q < 4096 => base.powi(q.to_f64() as usize),
        _ => base.pow(k),
    }
}

/// Extrapolated limit plus the size of the last tableau correction.
fn extrapolate(samples: &[Real], what: &str, ctx: &PrecisionContext) -> Result<Real> {
    let diagonal = richardson_diagonal(samples);
    let last = diagonal.last().expect("at least one sample").clone();
    let prev = &diagonal[diagonal.len() - 2];
    let scale = ctx.one().max(&last.abs()).clone();
    if !last.is_finite() || (&last - prev).abs() > ctx.comparison_tolerance() * &scale {
        return Err(Error::NonConvergence(format!(
            "{what}: successive extrapolations {} and {} differ beyond tolerance",
            prev.to_decimal(12),
            last.to_decimal(12)
        )));
    }
    Ok(last)
}

/// Estimates `l = lim n^k (w_n - w_{n+1})` and checks `n^(k-1) w_n -> l/(k-1)`.
pub fn difference_order_probe(
    omega: &mut dyn FnMut(u64) -> Result<Real>,
    k: &Real,
    range: (u64, u64),
    ctx: &PrecisionContext,
) -> Result<DifferenceEstimate> {
    if *k <= ctx.one() {
        return Err(Error::Domain("the probe needs k > 1".into()));
    }
    let ns = validate_range(range, 3)?;
    ctx.ensure_bits_for(range.1 + 1)?;
    let k_minus_one = k - 1;

    let mut differences = Vec::with_capacity(ns.len());
    let mut scaled = Vec::with_capacity(ns.len());
    for &n in &ns {
        let w_n = omega(n)?;
        let w_next = omega(n + 1)?;
        differences.push(power(n, k, ctx) * (&w_n - &w_next));
        scaled.push(power(n, &k_minus_one, ctx) * &w_n);
    }

    let l = extrapolate(&differences, "n^k (w_n - w_{n+1})", ctx)?;
    let scaled_limit = extrapolate(&scaled, "n^(k-1) w_n", ctx)?;
    let residuals: Vec<Real> = ns
        .iter()
        .zip(&differences)
        .map(|(&n, s)| (s - &l) * ctx.uint(n))
        .collect();
    let next_coefficient = richardson_diagonal(&residuals[..residuals.len() - 1])
        .pop()
        .expect("nonempty");

    let limit_constant = &l / &k_minus_one;
    let scale = ctx.one().max(&l.abs()).clone();
    let consistent = (&scaled_limit - &limit_constant).abs() <= ctx.comparison_tolerance() * &scale;
    Ok(DifferenceEstimate {
        difference_limit: l,
        scaled_limit,
        next_coefficient,
        estimate: OrderEstimate {
            exponent: k_minus_one,
            limit_constant,
            sample_range: (ns[0], *ns.last().expect("nonempty")),
        },
        consistent,
    })
}

/// Sampling grid used by the fitting and truncation experiments.
pub const DEFAULT_PROBE_RANGE: (u64, u64) = (64, 65_536);

/// One-parameter families of the two-term fits: the free slot is the
/// coefficient of `(n + 11/12)^-2` (`C`) or of `(n + 11/12)^-3` with the
/// square term fixed at zero (`D`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitFamily {
    C,
    D,
}

impl FitFamily {
    pub fn name(self) -> &'static str {
        match self {
            FitFamily::C => "c",
            FitFamily::D => "d",
        }
    }

    pub fn spec(self, param: &ExactRational) -> ExpansionSpec {
        let half = ExactRational::ratio(1, 2);
        let coefficients = match self {
            FitFamily::C => vec![half, param.clone()],
            FitFamily::D => vec![half, ExactRational::zero(), param.clone()],
        };
        ExpansionSpec::new(d_shift(), coefficients).expect("11/12 is a valid shift")
    }

    /// Power of `1/n` that leads `w_n - w_{n+1}` while the slot is free.
    pub fn order(self) -> u32 {
        match self {
            FitFamily::C => 3,
            FitFamily::D => 4,
        }
    }

    /// Reference leading coefficient: `2c`, or `3d - 5/96`.
    pub fn reference_dominant(self, param: &ExactRational) -> ExactRational {
        match self {
            FitFamily::C => ExactRational::from(2) * param,
            FitFamily::D => ExactRational::from(3) * param - ExactRational::ratio(5, 96),
        }
    }

    /// Reference next coefficient: `-(7c + 5/96)`, or `-15d + 493/2160`.
    pub fn reference_next(self, param: &ExactRational) -> ExactRational {
        match self {
            FitFamily::C => -(ExactRational::from(7) * param + ExactRational::ratio(5, 96)),
            FitFamily::D => ExactRational::ratio(493, 2160) - ExactRational::from(15) * param,
        }
    }

    /// Exact root of [`reference_dominant`](Self::reference_dominant).
    pub fn reference_root(self) -> ExactRational {
        match self {
            FitFamily::C => ExactRational::zero(),
            FitFamily::D => ExactRational::ratio(5, 288),
        }
    }

    pub fn default_params(self) -> Vec<ExactRational> {
        match self {
            FitFamily::C => vec![
                ExactRational::ratio(-1, 10),
                ExactRational::zero(),
                ExactRational::ratio(1, 10),
            ],
            FitFamily::D => vec![
                ExactRational::zero(),
                ExactRational::ratio(1, 100),
                ExactRational::ratio(1, 50),
            ],
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitSample {
    pub param: ExactRational,
    pub dominant: Real,
    pub next: Real,
}

#[derive(Clone, Debug)]
pub struct FitReport {
    pub family: FitFamily,
    pub order: u32,
    pub samples: Vec<FitSample>,
    pub root: Real,
    pub bracket: (ExactRational, ExactRational),
    pub bisection_steps: usize,
}

struct FitProbe<'a> {
    family: FitFamily,
    ctx: &'a PrecisionContext,
    cache: TruthCache,
}

impl FitProbe<'_> {
    fn measure(&mut self, param: &ExactRational) -> Result<DifferenceEstimate> {
        let spec = self.family.spec(param);
        let k = self.ctx.int(self.family.order() as i64);
        let (cache, ctx) = (&mut self.cache, self.ctx);
        difference_order_probe(&mut |n| cache.omega(n, &spec, ctx), &k, DEFAULT_PROBE_RANGE, ctx)
    }
}

/// Width at which the bisection on the fitted parameter stops.
const ROOT_WIDTH: (i64, i64) = (1, 1_000_000_000_000_000);

/// Measures the dominant coefficient of `w_n - w_{n+1}` for each parameter
/// and bisects for the parameter that cancels it.
pub fn fit_leading_coeffs(
    family: FitFamily,
    params: &[ExactRational],
    ctx: &PrecisionContext,
) -> Result<FitReport> {
    if params.is_empty() {
        return Err(Error::Domain("at least one parameter value is required".into()));
    }
    let mut probe = FitProbe {
        family,
        ctx,
        cache: TruthCache::default(),
    };
    let mut samples = Vec::with_capacity(params.len());
    for param in params {
        let est = probe.measure(param)?;
        samples.push(FitSample {
            param: param.clone(),
            dominant: est.difference_limit,
            next: est.next_coefficient,
        });
    }

    let mut sorted: Vec<&FitSample> = samples.iter().collect();
    sorted.sort_by(|a, b| a.param.cmp(&b.param));
    let exact_zero = sorted.iter().find(|s| s.dominant.is_zero());
    let bracket = sorted
        .windows(2)
        .find(|w| w[0].dominant.is_negative() != w[1].dominant.is_negative())
        .map(|w| (w[0], w[1]));

    let (root, bracket, steps) = match (exact_zero, bracket) {
        (Some(s), _) => (ctx.rational(&s.param), (s.param.clone(), s.param.clone()), 0),
        (None, Some((lo, hi))) => {
            let lo_negative = lo.dominant.is_negative();
            let (mut a, mut b) = (lo.param.clone(), hi.param.clone());
            let width = ExactRational::ratio(ROOT_WIDTH.0, ROOT_WIDTH.1);
            let mut steps = 0;
            while &b - &a > width {
                let mid = (&a + &b) / ExactRational::from(2);
                let value = probe.measure(&mid)?.difference_limit;
                if value.is_zero() {
                    a = mid.clone();
                    b = mid;
                    break;
                }
                if value.is_negative() == lo_negative {
                    a = mid;
                } else {
                    b = mid;
                }
                steps += 1;
            }
            let mid = (&a + &b) / ExactRational::from(2);
            (ctx.rational(&mid), (a, b), steps)
        }
        (None, None) => return Err(Error::NoBracket),
    };

    Ok(FitReport {
        family,
        order: family.order(),
        samples,
        root,
        bracket,
        bisection_steps: steps,
    })
}

/// Sampling grid for the truncation-order measurement.
pub const TRUNCATION_RANGE: (u64, u64) = (256, 65_536);

/// Measures the decay exponent `p` of `|w_n| ~ C n^-p` for the exact
/// expansion around `x + eps` truncated after `depth` terms.
pub fn truncation_order_report(
    eps: &ExactRational,
    depth: usize,
    ctx: &PrecisionContext,
) -> Result<OrderEstimate> {
    truncation_order_report_on(eps, depth, TRUNCATION_RANGE, ctx)
}

pub fn truncation_order_report_on(
    eps: &ExactRational,
    depth: usize,
    range: (u64, u64),
    ctx: &PrecisionContext,
) -> Result<OrderEstimate> {
    if depth == 0 {
        return Err(Error::Domain("truncation depth must be at least 1".into()));
    }
    let ns = validate_range(range, 4)?;
    ctx.ensure_bits_for(range.1)?;
    let spec = ExpansionSpec::for_shift(eps.clone(), depth)?;
    let omegas = ns
        .iter()
        .map(|&n| relative_error_seq(n, &spec, ctx).map(|w| w.abs()))
        .collect::<Result<Vec<_>>>()?;
    if omegas.iter().any(Real::is_zero) {
        return Err(Error::Domain("relative error vanished on the sample grid".into()));
    }
    let ln2 = ctx.int(2).ln();
    let local: Vec<Real> = omegas.windows(2).map(|w| (&w[0] / &w[1]).ln() / &ln2).collect();
    let exponent = richardson_diagonal(&local).pop().expect("nonempty");

    let rounded = exponent.to_f64().round();
    let p = if (exponent.to_f64() - rounded).abs() < 0.01 {
        ctx.int(rounded as i64)
    } else {
        exponent.clone()
    };
    let scaled: Vec<Real> = ns
        .iter()
        .zip(&omegas)
        .map(|(&n, w)| power(n, &p, ctx) * w)
        .collect();
    let limit_constant = richardson_diagonal(&scaled).pop().expect("nonempty");
    Ok(OrderEstimate {
        exponent,
        limit_constant,
        sample_range: (ns[0], *ns.last().expect("nonempty")),
    })
}

/// Exponent the truncation should show: the index of the first omitted
/// nonzero coefficient.
pub fn expected_truncation_exponent(eps: &ExactRational, depth: usize) -> Option<usize> {
    let coeffs = shifted_coefficients(eps, depth + 64);
    coeffs
        .iter()
        .enumerate()
        .skip(depth)
        .find(|(_, c)| !c.is_zero())
        .map(|(i, _)| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn q(p: i64, d: i64) -> ExactRational {
        ExactRational::ratio(p, d)
    }

    fn close(a: &Real, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol
    }

    #[test]
    fn pow_expr_small_cases() {
        let c = ctx();
        let two = pow_expr(&c.one(), &c).unwrap();
        assert!((two - c.int(2)).abs() < c.one().ldexp(-250));
        let root3 = pow_expr(&c.rational(&q(1, 2)), &c).unwrap();
        assert!((root3 - c.int(3).sqrt()).abs() < c.one().ldexp(-250));
        assert!(pow_expr(&c.zero(), &c).is_err());
        assert!(pow_expr(&c.int(-1), &c).is_err());
    }

    #[test]
    fn pow_expr_large_argument() {
        let c = ctx();
        let v = pow_expr(&c.uint(1_000_000), &c).unwrap();
        let e = c.e();
        let lower = &e - &e / 2_000_000 - c.rational(&q(1, 1_000_000_000));
        assert!(v < e && v > lower);
    }

    #[test]
    fn truncated_evaluation() {
        let c = ctx();
        let empty = ExpansionSpec::new(d_shift(), vec![]).unwrap();
        assert_eq!(eval_truncated(&c.int(5), &empty, &c).unwrap(), c.e());

        let one_term = ExpansionSpec::new(d_shift(), vec![q(1, 2)]).unwrap();
        assert_eq!(one_term.bracket_exact(&ExactRational::from(10)).unwrap(), q(125, 131));
        let expected = c.e() * c.rational(&(ExactRational::one() - q(6, 131)));
        let got = eval_truncated(&c.int(10), &one_term, &c).unwrap();
        assert!((got - expected).abs() < c.one().ldexp(-250));

        let deep = ExpansionSpec::d_series(30);
        let diff = eval_truncated(&c.int(5), &deep, &c).unwrap() - pow_expr(&c.int(5), &c).unwrap();
        assert!(diff.abs().to_f64() < 1e-20);
        assert!(eval_truncated(&c.zero(), &deep, &c).is_err());
    }

    #[test]
    fn shift_must_lie_in_unit_interval() {
        assert!(ExpansionSpec::new(ExactRational::zero(), vec![]).is_err());
        assert!(ExpansionSpec::new(q(3, 2), vec![]).is_err());
        assert!(ExpansionSpec::new(ExactRational::one(), vec![]).is_ok());
    }

    #[test]
    fn relative_error_sequences() {
        let c = ctx();
        let deep = ExpansionSpec::d_series(30);
        assert!(relative_error_seq(10, &deep, &c).unwrap().abs().to_f64() < 1e-25);

        // (11/12, 1/2): w_n ~ -(5/288) / n^3.
        let one_term = ExpansionSpec::new(d_shift(), vec![q(1, 2)]).unwrap();
        let n = 100_000u64;
        let scaled = relative_error_seq(n, &one_term, &c).unwrap() * c.uint(n).powi(3);
        assert!(close(&scaled, -5.0 / 288.0, 1e-6));

        // (1, 1/2): w_n ~ -(1/24) / n^2.
        let first = ExpansionSpec::new(ExactRational::one(), vec![q(1, 2)]).unwrap();
        let scaled = relative_error_seq(n, &first, &c).unwrap() * c.uint(n).powi(2);
        assert!(close(&scaled, -1.0 / 24.0, 1e-5));

        assert!(relative_error_seq(0, &first, &c).is_err());
        let bad = ExpansionSpec::new(ExactRational::one(), vec![ExactRational::from(5)]).unwrap();
        assert!(matches!(relative_error_seq(1, &bad, &c), Err(Error::NonPositiveApproximant(1))));
    }

    #[test]
    fn richardson_removes_inverse_powers() {
        let c = ctx();
        // f(n) = 3 + 1/n - 2/n^2 + 5/n^3
        let samples: Vec<Real> = [8i64, 16, 32, 64, 128]
            .iter()
            .map(|&n| {
                let x = c.int(n).recip();
                c.int(3) + &x - x.powi(2) * 2 + x.powi(3) * 5
            })
            .collect();
        let best = richardson_diagonal(&samples).pop().unwrap();
        assert!((best - c.int(3)).abs() < c.one().ldexp(-240));
    }

    #[test]
    fn probe_on_analytic_sequences() {
        let c = ctx();
        let est = difference_order_probe(
            &mut |n| Ok(c.uint(n).powi(2).recip()),
            &c.int(3),
            (100, 100_000),
            &c,
        )
        .unwrap();
        assert!(close(&est.difference_limit, 2.0, 1e-20));
        assert!(close(&est.scaled_limit, 1.0, 1e-20));
        assert!(close(&est.estimate.limit_constant, 1.0, 1e-20));
        assert!(est.consistent);

        // w_n = A / n^p gives l = pA.
        let a = c.rational(&q(-7, 3));
        let est = difference_order_probe(&mut |n| Ok(&a / c.uint(n).powi(4)), &c.int(5), (100, 100_000), &c).unwrap();
        assert!(close(&est.difference_limit, -28.0 / 3.0, 1e-6));
        assert!(close(&est.estimate.limit_constant, -7.0 / 3.0, 1e-6));
    }

    #[test]
    fn probe_rejects_bad_input_and_divergence() {
        let c = ctx();
        let mut f = |n: u64| Ok(c.uint(n).recip());
        assert!(difference_order_probe(&mut f, &c.one(), (10, 1000), &c).is_err());
        assert!(difference_order_probe(&mut f, &c.int(2), (1000, 1000), &c).is_err());
        assert!(difference_order_probe(&mut f, &c.int(2), (0, 1000), &c).is_err());
        let half = c.rational(&q(3, 2));
        let mut growing = |n: u64| Ok(c.uint(n).pow(&half).recip());
        let err = difference_order_probe(&mut growing, &c.int(3), (100, 100_000), &c).unwrap_err();
        assert!(matches!(err, Error::NonConvergence(_)), "{err}");
    }

    #[test]
    fn probe_requires_enough_bits() {
        let c = PrecisionContext::new(128).unwrap();
        let err = difference_order_probe(&mut |n| Ok(c.uint(n).recip()), &c.int(2), (100, 100_000), &c).unwrap_err();
        assert!(matches!(err, Error::InsufficientPrecision { .. }));
    }

    #[test]
    fn probe_on_c_experiment() {
        let c = ctx();
        let spec = FitFamily::C.spec(&ExactRational::one());
        let est = difference_order_probe(&mut |n| relative_error_seq(n, &spec, &c), &c.int(3), DEFAULT_PROBE_RANGE, &c)
            .unwrap();
        assert!(close(&est.difference_limit, 2.0, 1e-12));
        // next coefficient -(7c + 5/96)
        assert!(close(&est.next_coefficient, -(7.0 + 5.0 / 96.0), 1e-9));
    }

    #[test]
    fn probe_on_d_experiment() {
        let c = ctx();
        let spec = FitFamily::D.spec(&q(5, 288));
        let est = difference_order_probe(&mut |n| relative_error_seq(n, &spec, &c), &c.int(5), (100, 100_000), &c)
            .unwrap();
        assert!(close(&est.difference_limit, -139.0 / 4320.0, 1e-12));
        assert!(close(&est.estimate.limit_constant, -139.0 / 17280.0, 1e-12));
        assert!(est.consistent);
    }

    #[test]
    fn fit_recovers_roots() {
        let c = ctx();
        let report = fit_leading_coeffs(FitFamily::C, &FitFamily::C.default_params(), &c).unwrap();
        for s in &report.samples {
            let expected = FitFamily::C.reference_dominant(&s.param).to_f64();
            assert!(close(&s.dominant, expected, 1e-12), "c = {}", s.param);
        }
        assert!(report.root.abs().to_f64() < 1e-6);

        let report = fit_leading_coeffs(FitFamily::D, &FitFamily::D.default_params(), &c).unwrap();
        assert!(close(&report.samples[0].dominant, -5.0 / 96.0, 1e-12));
        assert!(close(&report.root, 5.0 / 288.0, 1e-6));
    }

    #[test]
    fn fit_without_bracket_fails() {
        let c = ctx();
        let params = [q(1, 10), q(2, 10)];
        assert_eq!(fit_leading_coeffs(FitFamily::C, &params, &c).unwrap_err(), Error::NoBracket);
        assert!(fit_leading_coeffs(FitFamily::C, &[], &c).is_err());
    }

    #[test]
    fn truncation_exponents() {
        let c = ctx();
        let cases = [
            (ExactRational::one(), 1, 2.0),
            (d_shift(), 1, 3.0),
            (d_shift(), 4, 5.0),
        ];
        for (eps, depth, expected) in cases {
            let est = truncation_order_report(&eps, depth, &c).unwrap();
            assert!(close(&est.exponent, expected, 0.05), "eps={eps} K={depth}: {}", est.exponent.to_f64());
            assert_eq!(expected_truncation_exponent(&eps, depth), Some(expected as usize));
        }
        assert!(truncation_order_report(&d_shift(), 0, &c).is_err());
    }

    #[test]
    fn truncation_constant_is_first_omitted_coefficient() {
        let c = ctx();
        let est = truncation_order_report(&ExactRational::one(), 1, &c).unwrap();
        assert!(close(&est.limit_constant, 1.0 / 24.0, 1e-9));
    }
}
