//! Weight families `w_n` that sharpen Carleman's inequality
//! `sum (a_1 ... a_n)^(1/n) < e sum w_n a_n`, with finite-range checks.
//!
//! A family is certified on `1..=N` when the pointwise margin
//! `e w_n - (1 + 1/n)^n` is positive throughout.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::asymptotic::{pow_expr_at, ExpansionSpec};
use crate::error::{Error, Result};
use crate::rational::ExactRational;
use crate::real::{pairwise_sum, PrecisionContext, Real};

pub const DEFAULT_REPORT_N: usize = 10_000;
pub const DEFAULT_MARGIN_N: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightFamily {
    ClassicalE,
    /// `1 - 1/(2n + 2)`.
    BichengDebnath,
    /// `(1 + 1/(n + 1/5))^(-1/2)`.
    PingGuozheng,
    /// `(1 - 1/(2cn + 4c/3 + 1/2))^c`, `c > 0`.
    YangParam(ExactRational),
    /// `1 - sum_{k<=K} b_k/(n+1)^k`, `K >= 1`.
    BSeries(usize),
    /// `1 - sum_{k<=K} d_k/(n+11/12)^k`, `K >= 1`.
    DSeries(usize),
}

impl WeightFamily {
    pub fn yang_default() -> Self {
        WeightFamily::YangParam(ExactRational::one())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFamily::YangParam(c) if !c.is_positive() => {
                Err(Error::InvalidFamily(format!("yang parameter must be positive, got {c}")))
            }
            WeightFamily::BSeries(0) | WeightFamily::DSeries(0) => {
                Err(Error::InvalidFamily("series weights need K >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Stable machine name, parseable by `FromStr`.
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// The exact weight, for families whose weights are rational.
    pub fn weight_exact(&self, n: usize) -> Result<Option<ExactRational>> {
        self.validate()?;
        require_index(n)?;
        let nq = ExactRational::from(n as i64);
        Ok(match self {
            WeightFamily::ClassicalE => Some(ExactRational::one()),
            WeightFamily::BichengDebnath => Some(ExactRational::one() - ExactRational::from(2 * n as i64 + 2).recip()?),
            WeightFamily::PingGuozheng => None,
            WeightFamily::YangParam(c) => {
                if !c.is_integer() {
                    return Ok(None);
                }
                let base = yang_base_exact(c, n)?;
                Some(base.pow(c.to_f64() as i32))
            }
            WeightFamily::BSeries(k) => Some(ExpansionSpec::b_series(*k).bracket_exact(&nq)?),
            WeightFamily::DSeries(k) => Some(ExpansionSpec::d_series(*k).bracket_exact(&nq)?),
        })
    }
}

fn require_index(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("weights are indexed from n = 1".into()));
    }
    Ok(())
}

/// `1 - 1/(2cn + 4c/3 + 1/2)`, rejected when not positive.
fn yang_base_exact(c: &ExactRational, n: usize) -> Result<ExactRational> {
    let denom = c * ExactRational::from(2 * n as i64) + c * ExactRational::ratio(4, 3) + ExactRational::ratio(1, 2);
    let base = ExactRational::one() - denom.recip()?;
    if !base.is_positive() {
        return Err(Error::InvalidFamily(format!("yang base is not positive at c = {c}, n = {n}")));
    }
    Ok(base)
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::ClassicalE => write!(f, "classical"),
            WeightFamily::BichengDebnath => write!(f, "bicheng-debnath"),
            WeightFamily::PingGuozheng => write!(f, "ping-guozheng"),
            WeightFamily::YangParam(c) => write!(f, "yang:{c}"),
            WeightFamily::BSeries(k) => write!(f, "b-series:{k}"),
            WeightFamily::DSeries(k) => write!(f, "d-series:{k}"),
        }
    }
}

/// Accepts `classical`, `bicheng-debnath`, `ping-guozheng`, `yang[:c]`,
/// `b-series:K` and `d-series:K`.
impl FromStr for WeightFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let bad = || Error::InvalidFamily(s.to_string());
        let series_depth = |p: Option<&str>| -> Result<usize> {
            p.ok_or_else(|| Error::InvalidFamily(format!("{name} needs a depth, e.g. {name}:3")))?
                .parse::<usize>()
                .map_err(|_| bad())
        };
        let family = match (name, param) {
            ("classical" | "classical-e", None) => WeightFamily::ClassicalE,
            ("bicheng-debnath", None) => WeightFamily::BichengDebnath,
            ("ping-guozheng", None) => WeightFamily::PingGuozheng,
            ("yang", None) => WeightFamily::yang_default(),
            ("yang", Some(c)) => WeightFamily::YangParam(c.parse().map_err(|_| bad())?),
            ("b-series", p) => WeightFamily::BSeries(series_depth(p)?),
            ("d-series", p) => WeightFamily::DSeries(series_depth(p)?),
            _ => return Err(bad()),
        };
        family.validate()?;
        Ok(family)
    }
}

/// A family with its per-`n` constants converted once.
pub struct PreparedWeight {
    family: WeightFamily,
    kind: Prepared,
}

enum Prepared {
    One,
    BichengDebnath,
    PingGuozheng { fifth: Real },
    /// Integer exponents use repeated multiplication.
    Yang { c: Real, exact_c: ExactRational, int_c: Option<usize> },
    Series(ExpansionSpec),
}

impl PreparedWeight {
    pub fn new(family: &WeightFamily, ctx: &PrecisionContext) -> Result<Self> {
        family.validate()?;
        let kind = match family {
            WeightFamily::ClassicalE => Prepared::One,
            WeightFamily::BichengDebnath => Prepared::BichengDebnath,
            WeightFamily::PingGuozheng => Prepared::PingGuozheng {
                fifth: ctx.rational(&ExactRational::ratio(1, 5)),
            },
            WeightFamily::YangParam(c) => Prepared::Yang {
                c: ctx.rational(c),
                exact_c: c.clone(),
                int_c: small_integer(c),
            },
            WeightFamily::BSeries(k) => Prepared::Series(ExpansionSpec::b_series(*k)),
            WeightFamily::DSeries(k) => Prepared::Series(ExpansionSpec::d_series(*k)),
        };
        Ok(Self {
            family: family.clone(),
            kind,
        })
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    /// `w_n`; series weights accumulate in floating point by Horner.
    pub fn weight(&self, n: usize, ctx: &PrecisionContext) -> Result<Real> {
        require_index(n)?;
        let nr = ctx.uint(n as u64);
        Ok(match &self.kind {
            Prepared::One => ctx.one(),
            Prepared::BichengDebnath => ctx.one() - (nr * 2 + 2).recip(),
            Prepared::PingGuozheng { fifth } => (ctx.one() + (nr + fifth).recip()).sqrt().recip(),
            Prepared::Yang { c, exact_c, int_c } => {
                let base = ctx.rational(&yang_base_exact(exact_c, n)?);
                match int_c {
                    Some(k) => base.powi(*k),
                    None => base.pow(c),
                }
            }
            Prepared::Series(spec) => spec.bracket(&nr, ctx),
        })
    }
}

fn small_integer(q: &ExactRational) -> Option<usize> {
    (q.is_integer() && q.is_positive() && *q <= 64).then(|| q.to_f64() as usize)
}

/// `w_n` for a single family and index.
pub fn weight(family: &WeightFamily, n: usize, ctx: &PrecisionContext) -> Result<Real> {
    PreparedWeight::new(family, ctx)?.weight(n, ctx)
}

/// `(1 + 1/n)^n` for `n = 1..=N`, computed once and shared between scans.
#[derive(Clone, Debug)]
pub struct PowTable {
    values: Vec<Real>,
}

impl PowTable {
    pub fn new(n_max: usize, ctx: &PrecisionContext) -> Result<Self> {
        require_index(n_max)?;
        ctx.ensure_bits_for(n_max as u64)?;
        let values = (1..=n_max as u64).into_par_iter().map(|n| pow_expr_at(n, ctx)).collect();
        Ok(Self { values })
    }

    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, n: usize) -> &Real {
        &self.values[n - 1]
    }

    /// The table restricted to `1..=n`.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        require_index(n)?;
        if n > self.n_max() {
            return Err(Error::Domain(format!("table covers 1..={}, asked for {n}", self.n_max())));
        }
        Ok(Self {
            values: self.values[..n].to_vec(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct MarginReport {
    pub family: WeightFamily,
    pub n_max: usize,
    pub min_margin: Real,
    pub argmin: usize,
    pub total_slack: Real,
}

impl MarginReport {
    pub fn holds(&self) -> bool {
        self.min_margin.is_positive()
    }
}

/// `e w_n - (1 + 1/n)^n` for `n = 1..=N`.
pub fn margins(family: &WeightFamily, table: &PowTable, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    let prepared = PreparedWeight::new(family, ctx)?;
    let e = ctx.e();
    (1..=table.n_max())
        .into_par_iter()
        .map(|n| Ok(&e * prepared.weight(n, ctx)? - table.get(n)))
        .collect()
}

pub fn margin_report(family: &WeightFamily, table: &PowTable, ctx: &PrecisionContext) -> Result<MarginReport> {
    let values = margins(family, table, ctx)?;
    let (argmin, min_margin) = values
        .iter()
        .enumerate()
        .fold(None::<(usize, &Real)>, |best, (i, v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((i, v)),
        })
        .expect("table is nonempty");
    Ok(MarginReport {
        family: family.clone(),
        n_max: table.n_max(),
        min_margin: min_margin.clone(),
        argmin: argmin + 1,
        total_slack: pairwise_sum(&values, ctx.mantissa_bits()),
    })
}

/// `min_{1<=n<=N} e w_n - (1 + 1/n)^n`; ties resolve to the smallest `n`.
pub fn pointwise_margin(family: &WeightFamily, n_max: usize, ctx: &PrecisionContext) -> Result<MarginReport> {
    family.validate()?;
    margin_report(family, &PowTable::new(n_max, ctx)?, ctx)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SequenceSpec {
    /// `a_n = r^n`, `0 < r < 1`.
    Geometric(ExactRational),
    /// `a_n = n^(-p)`, `p > 1`.
    PowerDecay(ExactRational),
    /// `a_1, a_2, ...` as listed, zero afterwards.
    FiniteSupport(Vec<ExactRational>),
}

impl SequenceSpec {
    pub fn default_geometric() -> Self {
        SequenceSpec::Geometric(ExactRational::ratio(1, 2))
    }

    pub fn default_power_decay() -> Self {
        SequenceSpec::PowerDecay(ExactRational::from(2))
    }

    pub fn default_finite_support() -> Self {
        SequenceSpec::FiniteSupport(vec![
            ExactRational::one(),
            ExactRational::ratio(1, 2),
            ExactRational::ratio(1, 4),
        ])
    }

    pub fn defaults() -> Vec<Self> {
        vec![
            Self::default_geometric(),
            Self::default_power_decay(),
            Self::default_finite_support(),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSequence(msg));
        match self {
            SequenceSpec::Geometric(r) if !(r.is_positive() && *r < 1) => bad(format!("geometric ratio {r} is outside (0, 1)")),
            SequenceSpec::PowerDecay(p) if !(*p > 1) => bad(format!("power decay exponent {p} must exceed 1")),
            SequenceSpec::FiniteSupport(v) if v.iter().any(ExactRational::is_negative) => {
                bad("finite support values must be nonnegative".into())
            }
            SequenceSpec::FiniteSupport(v) if !v.iter().any(ExactRational::is_positive) => {
                bad("finite support needs a positive value".into())
            }
            _ => Ok(()),
        }
    }

    /// `ln a_n`, or `None` when `a_n = 0`.
    fn ln_term(&self, n: usize, ctx: &PrecisionContext) -> Option<Real> {
        match self {
            SequenceSpec::Geometric(r) => Some(ctx.rational(r).ln() * n as i64),
            SequenceSpec::PowerDecay(p) => Some(-(ctx.rational(p) * ctx.uint(n as u64).ln())),
            SequenceSpec::FiniteSupport(v) => v
                .get(n - 1)
                .filter(|a| a.is_positive())
                .map(|a| ctx.rational(a).ln()),
        }
    }

    fn term(&self, n: usize, ctx: &PrecisionContext) -> Real {
        match self {
            SequenceSpec::Geometric(r) => ctx.rational(r).powi(n),
            SequenceSpec::PowerDecay(p) => match small_integer(p) {
                Some(k) => ctx.uint(n as u64).powi(k).recip(),
                None => ctx.uint(n as u64).pow(&-ctx.rational(p)),
            },
            SequenceSpec::FiniteSupport(v) => v.get(n - 1).map_or_else(|| ctx.zero(), |a| ctx.rational(a)),
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Geometric(r) => write!(f, "geometric:{r}"),
            SequenceSpec::PowerDecay(p) => write!(f, "power-decay:{p}"),
            SequenceSpec::FiniteSupport(v) => {
                let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
                write!(f, "finite:{}", parts.join(","))
            }
        }
    }
}

/// Accepts `geometric[:r]`, `power-decay[:p]` (or `power`) and
/// `finite[:a1,a2,...]`; a missing parameter takes the default.
impl FromStr for SequenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let parse = |p: &str| p.parse::<ExactRational>().map_err(|_| Error::InvalidSequence(s.to_string()));
        let seq = match (name, param) {
            ("geometric", None) => Self::default_geometric(),
            ("geometric", Some(r)) => SequenceSpec::Geometric(parse(r)?),
            ("power-decay" | "power", None) => Self::default_power_decay(),
            ("power-decay" | "power", Some(p)) => SequenceSpec::PowerDecay(parse(p)?),
            ("finite", None) => Self::default_finite_support(),
            ("finite", Some(list)) => SequenceSpec::FiniteSupport(list.split(',').map(parse).collect::<Result<_>>()?),
            _ => return Err(Error::InvalidSequence(s.to_string())),
        };
        seq.validate()?;
        Ok(seq)
    }
}

#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub family: WeightFamily,
    pub sequence: SequenceSpec,
    pub n_max: usize,
    /// `sum_{n<=N} (a_1 ... a_n)^(1/n)`.
    pub lhs: Real,
    /// `e sum_{n<=N} w_n a_n`.
    pub rhs: Real,
    pub min_margin: Real,
    pub margin_argmin: usize,
}

impl InequalityReport {
    pub fn holds(&self) -> bool {
        self.lhs < self.rhs
    }
}

/// `sum_{n<=N} (a_1 ... a_n)^(1/n)`.
///
/// Log prefix sums carry a zero flag: once some `a_k = 0`, every later
/// geometric mean is exactly 0.
pub fn carleman_lhs(seq: &SequenceSpec, n_max: usize, ctx: &PrecisionContext) -> Result<Real> {
    seq.validate()?;
    require_index(n_max)?;
    let logs: Vec<Option<Real>> = (1..=n_max).into_par_iter().map(|n| seq.ln_term(n, ctx)).collect();
    let mut prefix = Vec::with_capacity(n_max);
    let mut acc = Some(ctx.zero());
    for l in logs {
        acc = match (acc, l) {
            (Some(a), Some(l)) => Some(a + l),
            _ => None,
        };
        prefix.push(acc.clone());
    }
    let means: Vec<Real> = prefix
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| s.map_or_else(|| ctx.zero(), |s| (s / (i as i64 + 1)).exp()))
        .collect();
    Ok(pairwise_sum(&means, ctx.mantissa_bits()))
}

/// Reports for several families against one sequence; the left side and the
/// sequence terms are computed once.
pub fn finite_carleman_reports(
    seq: &SequenceSpec,
    families: &[WeightFamily],
    table: &PowTable,
    ctx: &PrecisionContext,
) -> Result<Vec<InequalityReport>> {
    let n_max = table.n_max();
    let lhs = carleman_lhs(seq, n_max, ctx)?;
    let terms: Vec<Real> = (1..=n_max).into_par_iter().map(|n| seq.term(n, ctx)).collect();
    let e = ctx.e();
    families
        .iter()
        .map(|family| {
            let prepared = PreparedWeight::new(family, ctx)?;
            let weighted: Vec<Real> = (1..=n_max)
                .into_par_iter()
                .map(|n| Ok(prepared.weight(n, ctx)? * &terms[n - 1]))
                .collect::<Result<_>>()?;
            let margin = margin_report(family, table, ctx)?;
            Ok(InequalityReport {
                family: family.clone(),
                sequence: seq.clone(),
                n_max,
                lhs: lhs.clone(),
                rhs: &e * pairwise_sum(&weighted, ctx.mantissa_bits()),
                min_margin: margin.min_margin,
                margin_argmin: margin.argmin,
            })
        })
        .collect()
}

pub fn finite_carleman_report(
    seq: &SequenceSpec,
    family: &WeightFamily,
    n_max: usize,
    ctx: &PrecisionContext,
) -> Result<InequalityReport> {
    seq.validate()?;
    family.validate()?;
    let table = PowTable::new(n_max, ctx)?;
    Ok(finite_carleman_reports(seq, std::slice::from_ref(family), &table, ctx)?.remove(0))
}

/// Families ordered by total slack `sum_{n<=N} e w_n - (1 + 1/n)^n`,
/// tightest first; ties keep input order.
pub fn tightness_ranking(families: &[WeightFamily], n_max: usize, ctx: &PrecisionContext) -> Result<Vec<MarginReport>> {
    if families.is_empty() {
        return Err(Error::InvalidFamily("ranking needs at least one family".into()));
    }
    for f in families {
        f.validate()?;
    }
    let table = PowTable::new(n_max, ctx)?;
    let mut reports = families
        .iter()
        .map(|f| margin_report(f, &table, ctx))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| a.total_slack.partial_cmp(&b.total_slack).expect("finite slack"));
    Ok(reports)
}
