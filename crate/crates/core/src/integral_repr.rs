//! The density `g(s) = s^s (1-s)^(1-s) sin(pi s) / pi` on `[0, 1]` and the
//! integrals built on it.
//!
//! `g` is symmetric about `1/2`, vanishes at both endpoints and has total
//! mass `e/24`. The function `h(x) = (x+1)(e - (1+1/x)^x)` equals
//! `e/2 + int_0^1 g(s)/(x+s) ds`, and for `n >= 2`
//!
//! `d_n = (-1)^n / 12^(n-1) * (-1/2 + (1/e) int_0^1 12 sum_{j<n-1} (12s-11)^j g(s) ds)`.

use crate::asymptotic::pow_expr;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_unit, QuadratureConfig, QuadratureResult};
use crate::real::{PrecisionContext, Real};

/// `g` evaluated from `s` and `1 - s`, both supplied without cancellation.
///
/// The sine is taken at `min(s, 1 - s)` so the result is symmetric to the
/// last bit.
pub fn g_density_pair(s: &Real, sc: &Real, pi: &Real) -> Real {
    if s.is_zero() || sc.is_zero() {
        return Real::from_i64(0, s.precision());
    }
    let log_mass = s * s.ln() + sc * sc.ln();
    let near = s.min(sc);
    log_mass.exp() * (pi * near).sin() / pi
}

pub fn g_density(s: &Real, ctx: &PrecisionContext) -> Result<Real> {
    if s.is_negative() || *s > ctx.one() {
        return Err(Error::Domain(format!("g is defined on [0, 1], got {s}")));
    }
    let sc = ctx.one() - s;
    Ok(g_density_pair(s, &sc, &ctx.pi()))
}

/// `int_0^1 g`, expected to equal `e/24`.
pub fn g_mass(cfg: &QuadratureConfig, ctx: &PrecisionContext) -> Result<QuadratureResult> {
    let pi = ctx.pi();
    integrate_unit(|s, sc| g_density_pair(s, sc, &pi), cfg, ctx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HRoute {
    /// `(x+1)(e - (1+1/x)^x)` evaluated directly.
    Direct,
    /// `e/2 + int_0^1 g(s)/(x+s) ds`.
    Integral,
}

/// `h(x)` for `x > 0` by the requested route.
pub fn alzer_h(x: &Real, route: HRoute, cfg: &QuadratureConfig, ctx: &PrecisionContext) -> Result<Real> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("h needs x > 0, got {x}")));
    }
    match route {
        HRoute::Direct => Ok((x + 1) * (ctx.e() - pow_expr(x, ctx)?)),
        HRoute::Integral => Ok(alzer_h_integral(x, cfg, ctx)?.value),
    }
}

/// Integral route for `h(x)`; the error estimate is that of the quadrature.
pub fn alzer_h_integral(x: &Real, cfg: &QuadratureConfig, ctx: &PrecisionContext) -> Result<QuadratureResult> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("h needs x > 0, got {x}")));
    }
    let pi = ctx.pi();
    let mut r = integrate_unit(|s, sc| g_density_pair(s, sc, &pi) / (x + s), cfg, ctx)?;
    r.value = ctx.e().ldexp(-1) + r.value;
    Ok(r)
}

/// `12 sum_{j=0}^{n-2} (12s - 11)^j` by Horner.
pub fn d_kernel(n: usize, s: &Real) -> Real {
    let t = s * 12 - 11;
    let mut acc = Real::from_i64(0, s.precision());
    for _ in 0..n.saturating_sub(1) {
        acc = acc * &t + 1;
    }
    acc * 12
}

/// `d_n` for `n >= 2` from the integral formula.
///
/// The configured tolerance applies to `d_n` itself; the raw integral is
/// solved to `tol * e * 12^(n-1)`, and the reported error estimate is mapped
/// back to the `d_n` scale.
pub fn d_from_integral(n: usize, cfg: &QuadratureConfig, ctx: &PrecisionContext) -> Result<QuadratureResult> {
    if n < 2 {
        return Err(Error::Domain(format!("integral formula needs n >= 2, got {n}")));
    }
    let e = ctx.e();
    let scale = ctx.int(12).powi(n - 1);
    let inner_tol = cfg.target_abs_tolerance() * &e * &scale;
    let inner_cfg = cfg.clone().with_tolerance(inner_tol)?;
    let pi = ctx.pi();
    let raw = integrate_unit(|s, sc| d_kernel(n, s) * g_density_pair(s, sc, &pi), &inner_cfg, ctx)?;
    let magnitude = (&raw.value / &e - ctx.one().ldexp(-1)) / &scale;
    let value = if n.is_multiple_of(2) { magnitude } else { -magnitude };
    Ok(QuadratureResult {
        value,
        error_estimate: raw.error_estimate / (&e * &scale),
        nodes_used: raw.nodes_used,
        levels: raw.levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_coeffs::d_from_recurrence;
    use crate::quadrature::QuadratureRule;
    use crate::rational::ExactRational;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn density_domain_and_endpoints() {
        let c = ctx();
        assert!(g_density(&c.int(-1), &c).is_err());
        assert!(g_density(&c.int(2), &c).is_err());
        assert!(g_density(&c.zero(), &c).unwrap().is_zero());
        assert!(g_density(&c.one(), &c).unwrap().is_zero());
        // g(1/2) = 1/(2 pi)
        let mid = g_density(&c.rational(&ExactRational::ratio(1, 2)), &c).unwrap();
        let expected = (c.pi() * 2).recip();
        assert!((mid - expected).abs() < c.one().ldexp(-240));
    }

    #[test]
    fn density_is_symmetric() {
        let c = ctx();
        let ulps = c.one().ldexp(-(c.mantissa_bits() as i32 - 3));
        for k in 0..=1000i64 {
            let s = c.rational(&ExactRational::ratio(k, 1000));
            let sc = c.rational(&ExactRational::ratio(1000 - k, 1000));
            let a = g_density(&s, &c).unwrap();
            let b = g_density(&sc, &c).unwrap();
            assert!((&a - &b).abs() <= &ulps * a.max(&c.one()), "k = {k}");
        }
    }

    #[test]
    fn mass_matches_both_rules() {
        let c = ctx();
        let expected = c.e() / 24;
        for rule in [QuadratureRule::DoubleExponential, QuadratureRule::CompositeGauss] {
            let cfg = QuadratureConfig::standard(&c).with_rule(rule);
            let r = g_mass(&cfg, &c).unwrap();
            assert!((r.value - &expected).abs().to_f64() < 1e-12, "{rule:?}");
        }
    }

    #[test]
    fn h_routes_agree() {
        let c = ctx();
        let cfg = QuadratureConfig::standard(&c);
        for x in [1i64, 2, 10, 100, 1_000_000] {
            let x = c.int(x);
            let direct = alzer_h(&x, HRoute::Direct, &cfg, &c).unwrap();
            let integral = alzer_h(&x, HRoute::Integral, &cfg, &c).unwrap();
            assert!((direct - integral).abs().to_f64() < 1e-12, "x = {x}");
        }
        assert!(alzer_h(&c.zero(), HRoute::Direct, &cfg, &c).is_err());
    }

    #[test]
    fn d_integral_matches_exact_values() {
        let c = ctx();
        let cfg = QuadratureConfig::standard(&c);
        for n in 2..=12 {
            let r = d_from_integral(n, &cfg, &c).unwrap();
            let exact = c.rational(&d_from_recurrence(n).unwrap());
            assert!((&r.value - exact).abs().to_f64() < 1e-12, "n = {n}");
            assert!(r.error_estimate <= *cfg.target_abs_tolerance());
        }
        assert!(d_from_integral(1, &cfg, &c).is_err());
    }

    #[test]
    fn halving_tolerance_refines() {
        let c = ctx();
        let loose = QuadratureConfig::standard(&c)
            .with_tolerance(c.rational(&ExactRational::ratio(1, 1_000_000)))
            .unwrap();
        let first = d_from_integral(4, &loose, &c).unwrap();
        let tighter = loose.with_tolerance(first.error_estimate.ldexp(-1)).unwrap();
        let second = d_from_integral(4, &tighter, &c).unwrap();
        assert!(second.error_estimate <= first.error_estimate.ldexp(-1));
        assert!(second.nodes_used > first.nodes_used);
    }

    #[test]
    fn exhausted_levels_report_failure() {
        let c = ctx();
        let cfg = QuadratureConfig::standard(&c)
            .with_tolerance(c.one().ldexp(-400))
            .unwrap()
            .with_max_levels(2)
            .unwrap();
        assert!(matches!(g_mass(&cfg, &c), Err(Error::QuadratureTolerance { levels: 2, .. })));
    }
}
