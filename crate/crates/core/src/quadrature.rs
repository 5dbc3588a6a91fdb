//! Extended-precision quadrature on `[0, 1]`.
//!
//! Integrands receive both `s` and `1 - s`, each computed without
//! cancellation, so factors like `(1 - s) ln(1 - s)` stay accurate at the
//! right endpoint.
//!
//! Two rules are available. The double-exponential (tanh-sinh) rule is the
//! default and copes with the `s ln s` endpoint behaviour. Composite
//! Gauss-Legendre on a mesh graded geometrically toward both endpoints is
//! there for cross-checks. Both refine level by level and report
//! `|Q_level - Q_{level-1}|` as the error estimate.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::ExactRational;
use crate::real::{pairwise_sum, PrecisionContext, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureRule {
    DoubleExponential,
    CompositeGauss,
}

impl QuadratureRule {
    pub fn name(self) -> &'static str {
        match self {
            QuadratureRule::DoubleExponential => "double-exponential",
            QuadratureRule::CompositeGauss => "composite-gauss",
        }
    }
}

impl std::str::FromStr for QuadratureRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "de" | "double-exponential" | "tanh-sinh" => Ok(QuadratureRule::DoubleExponential),
            "gauss" | "composite-gauss" => Ok(QuadratureRule::CompositeGauss),
            other => Err(Error::Parse(other.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureConfig {
    rule: QuadratureRule,
    target_abs_tolerance: Real,
    max_levels: usize,
}

pub const DEFAULT_MAX_LEVELS: usize = 12;

impl QuadratureConfig {
    pub fn new(rule: QuadratureRule, target_abs_tolerance: Real, max_levels: usize) -> Result<Self> {
        if !target_abs_tolerance.is_positive() {
            return Err(Error::Domain("quadrature tolerance must be positive".into()));
        }
        if max_levels == 0 {
            return Err(Error::Domain("max_levels must be at least 1".into()));
        }
        Ok(Self {
            rule,
            target_abs_tolerance,
            max_levels,
        })
    }

    /// Double-exponential rule, absolute tolerance `1e-14`.
    pub fn standard(ctx: &PrecisionContext) -> Self {
        let tol = ctx.rational(&ExactRational::ratio(1, 100_000_000_000_000));
        Self::new(QuadratureRule::DoubleExponential, tol, DEFAULT_MAX_LEVELS).expect("valid defaults")
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn target_abs_tolerance(&self) -> &Real {
        &self.target_abs_tolerance
    }

    pub fn max_levels(&self) -> usize {
        self.max_levels
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_tolerance(mut self, tol: Real) -> Result<Self> {
        if !tol.is_positive() {
            return Err(Error::Domain("quadrature tolerance must be positive".into()));
        }
        self.target_abs_tolerance = tol;
        Ok(self)
    }

    pub fn with_max_levels(mut self, max_levels: usize) -> Result<Self> {
        if max_levels == 0 {
            return Err(Error::Domain("max_levels must be at least 1".into()));
        }
        self.max_levels = max_levels;
        Ok(self)
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub value: Real,
    pub error_estimate: Real,
    pub nodes_used: usize,
    pub levels: usize,
}

/// A quadrature node on `[0, 1]`: position, its complement, and weight.
struct Node {
    s: Real,
    sc: Real,
    weight: Real,
}

fn evaluate<F>(nodes: &[Node], f: &F, prec: usize) -> Real
where
    F: Fn(&Real, &Real) -> Real + Sync,
{
    let terms: Vec<Real> = nodes.par_iter().map(|n| f(&n.s, &n.sc) * &n.weight).collect();
    pairwise_sum(&terms, prec)
}

/// Integrates `f(s, 1 - s)` over `[0, 1]`.
pub fn integrate_unit<F>(f: F, cfg: &QuadratureConfig, ctx: &PrecisionContext) -> Result<QuadratureResult>
where
    F: Fn(&Real, &Real) -> Real + Sync,
{
    integrate_unit_traced(f, cfg, ctx).0
}

/// Level-by-level error estimates, exposed for refinement checks.
pub fn integrate_unit_traced<F>(
    f: F,
    cfg: &QuadratureConfig,
    ctx: &PrecisionContext,
) -> (Result<QuadratureResult>, Vec<Real>)
where
    F: Fn(&Real, &Real) -> Real + Sync,
{
    let mut history = Vec::new();
    let result = match cfg.rule {
        QuadratureRule::DoubleExponential => tanh_sinh(&f, cfg, ctx, &mut history),
        QuadratureRule::CompositeGauss => graded_gauss(&f, cfg, ctx, &mut history),
    };
    (result, history)
}

fn finish(
    level_values: (Real, Option<Real>),
    levels: usize,
    nodes_used: usize,
    cfg: &QuadratureConfig,
    history: &mut Vec<Real>,
) -> Option<QuadratureResult> {
    let (current, previous) = level_values;
    let estimate = (&current - previous.as_ref()?).abs();
    history.push(estimate.clone());
    (estimate <= cfg.target_abs_tolerance).then_some(QuadratureResult {
        value: current,
        error_estimate: estimate,
        nodes_used,
        levels,
    })
}

fn tolerance_failure(history: &[Real], levels: usize, nodes_used: usize) -> Error {
    Error::QuadratureTolerance {
        levels,
        estimate: history.last().map_or(f64::INFINITY, Real::to_f64),
        nodes_used,
    }
}

/// Abscissa cut-off: beyond it the transformed weight is below `2^-(prec+20)`.
fn tanh_sinh_tmax(prec: usize) -> f64 {
    let target = -((prec + 20) as f64) * std::f64::consts::LN_2;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let log_weight = |t: f64| half_pi.ln() + t.cosh().ln() - std::f64::consts::PI * t.sinh();
    let mut t = 0.0;
    while log_weight(t) > target {
        t += 0.0625;
    }
    t
}

fn tanh_sinh<F>(
    f: &F,
    cfg: &QuadratureConfig,
    ctx: &PrecisionContext,
    history: &mut Vec<Real>,
) -> Result<QuadratureResult>
where
    F: Fn(&Real, &Real) -> Real + Sync,
{
    let prec = ctx.mantissa_bits();
    let t_max = tanh_sinh_tmax(prec);
    let half_pi = ctx.pi().ldexp(-1);

    // Nodes at +t and -t share the transform; s and 1 - s swap.
    let nodes_at = |t: &Real| -> Vec<Node> {
        let u = &half_pi * t.sinh();
        let q = (-(u.ldexp(1))).exp();
        let denom = ctx.one() + &q;
        let s = denom.recip();
        let sc = &q / &denom;
        let weight = (&half_pi * t.cosh() * &s * &sc).ldexp(1);
        if t.is_zero() {
            vec![Node { s, sc, weight }]
        } else {
            vec![
                Node {
                    s: sc.clone(),
                    sc: s.clone(),
                    weight: weight.clone(),
                },
                Node { s, sc, weight },
            ]
        }
    };

    let mut sum = ctx.zero();
    let mut nodes_used = 0usize;
    let mut previous: Option<Real> = None;
    for level in 0..cfg.max_levels {
        let steps: Vec<i64> = if level == 0 {
            (0..=t_max.floor() as i64).collect()
        } else {
            let per_unit = 1i64 << level;
            let max_j = (t_max * per_unit as f64).floor() as i64;
            (1..=max_j).step_by(2).collect()
        };
        let nodes: Vec<Node> = steps
            .par_iter()
            .flat_map_iter(|&j| nodes_at(&ctx.int(j).ldexp(-(level as i32))))
            .collect();
        nodes_used += nodes.len();
        sum = sum + evaluate(&nodes, f, prec);
        let current = sum.ldexp(-(level as i32));
        if let Some(done) = finish((current.clone(), previous.take()), level + 1, nodes_used, cfg, history) {
            return Ok(done);
        }
        previous = Some(current);
    }
    Err(tolerance_failure(history, cfg.max_levels, nodes_used))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_q`.
pub fn gauss_legendre(order: usize, ctx: &PrecisionContext) -> Vec<(Real, Real)> {
    let eps = ctx.one().ldexp(-(ctx.mantissa_bits() as i32 - 8));
    let legendre = |x: &Real| -> (Real, Real) {
        let mut p_prev = ctx.one();
        let mut p = x.clone();
        for j in 2..=order as i64 {
            let next = (x * &p * (2 * j - 1) - &p_prev * (j - 1)) / j;
            p_prev = p;
            p = next;
        }
        let dp = (x * &p - &p_prev) * order as i64 / (x * x - 1);
        (p, dp)
    };
    let mut out = Vec::with_capacity(order);
    for i in 0..order {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut x = Real::from_f64(guess, ctx.mantissa_bits());
        for _ in 0..100 {
            let (p, dp) = legendre(&x);
            let step = p / &dp;
            x = &x - &step;
            if step.abs() <= eps {
                break;
            }
        }
        let (_, dp) = legendre(&x);
        let weight = ctx.int(2) / ((ctx.one() - &x * &x) * &dp * &dp);
        out.push((x, weight));
    }
    out
}

const GAUSS_ORDER: usize = 20;
const PANELS_PER_LEVEL: usize = 6;

fn graded_gauss<F>(
    f: &F,
    cfg: &QuadratureConfig,
    ctx: &PrecisionContext,
    history: &mut Vec<Real>,
) -> Result<QuadratureResult>
where
    F: Fn(&Real, &Real) -> Real + Sync,
{
    let prec = ctx.mantissa_bits();
    let rule = gauss_legendre(GAUSS_ORDER, ctx);
    let mut nodes_used = 0usize;
    let mut previous: Option<Real> = None;
    for level in 0..cfg.max_levels {
        // Panels [0, 2^-m], [2^-m, 2^-(m-1)], ..., [1/4, 1/2] in the distance
        // sigma to the nearer endpoint, mirrored onto both halves.
        let m = PANELS_PER_LEVEL * (level + 1);
        let mut panels = vec![(ctx.zero(), ctx.one().ldexp(-(m as i32)))];
        for j in (1..m).rev() {
            panels.push((ctx.one().ldexp(-(j as i32 + 1)), ctx.one().ldexp(-(j as i32))));
        }
        let mut nodes = Vec::with_capacity(2 * panels.len() * rule.len());
        for (a, b) in &panels {
            let half = (b - a).ldexp(-1);
            for (x, w) in &rule {
                let sigma = a + &half * (x + 1);
                let weight = w * &half;
                let rest = ctx.one() - &sigma;
                nodes.push(Node {
                    s: sigma.clone(),
                    sc: rest.clone(),
                    weight: weight.clone(),
                });
                nodes.push(Node {
                    s: rest,
                    sc: sigma,
                    weight,
                });
            }
        }
        nodes_used += nodes.len();
        let current = evaluate(&nodes, f, prec);
        if let Some(done) = finish((current.clone(), previous.take()), level + 1, nodes_used, cfg, history) {
            return Ok(done);
        }
        previous = Some(current);
    }
    Err(tolerance_failure(history, cfg.max_levels, nodes_used))
}
