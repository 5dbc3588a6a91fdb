//! Exact coefficient sequences of the expansions
//!
//! ```text
//! (1 + 1/x)^x = e (1 - sum_k b_k / (x + 1)^k)
//!             = e (1 - sum_k d_k / (x + 11/12)^k)
//! ```
//!
//! `d_k` is produced by two unrelated routes: re-expanding the `b`-series
//! in powers of `1/(x + 11/12)` ([`d_from_b`]), and the generating-function
//! recurrence for `g(t) = e * sum c_n t^n` with `d_n = -c_n`
//! ([`d_from_recurrence`]). The two must agree exactly.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Shift of the expansion variable `1/(x + shift)` used by the d-series.
pub fn d_shift() -> ExactRational {
    ExactRational::ratio(11, 12)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    BSeries,
    DConversion,
    DRecurrence,
    ASequence,
    LogG,
}

impl Route {
    pub const ALL: [Route; 5] = [
        Route::BSeries,
        Route::DConversion,
        Route::DRecurrence,
        Route::ASequence,
        Route::LogG,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Route::BSeries => "b",
            Route::DConversion => "d-conversion",
            Route::DRecurrence => "d-recurrence",
            Route::ASequence => "a",
            Route::LogG => "log-g",
        }
    }

    /// Smallest index the route defines. The d-sequence starts at 1.
    pub fn first_index(self) -> usize {
        match self {
            Route::DConversion | Route::DRecurrence => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b" | "b-series" => Ok(Route::BSeries),
            "d-conversion" => Ok(Route::DConversion),
            "d-recurrence" => Ok(Route::DRecurrence),
            "a" | "a-sequence" => Ok(Route::ASequence),
            "log-g" => Ok(Route::LogG),
            other => Err(Error::UnknownRoute(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    pub route: Route,
    pub entries: Vec<(usize, ExactRational)>,
}

impl CoefficientTable {
    pub fn values(&self) -> impl Iterator<Item = &ExactRational> {
        self.entries.iter().map(|(_, v)| v)
    }

    pub fn get(&self, index: usize) -> Option<&ExactRational> {
        let first = self.entries.first()?.0;
        self.entries.get(index.checked_sub(first)?).map(|(_, v)| v)
    }
}

/// Rationals held over one shared denominator, so that sums over them are
/// integer sums. The denominator is the lcm of everything pushed so far.
#[derive(Clone, Debug)]
struct CommonDenominator {
    denom: BigInt,
    numers: Vec<BigInt>,
}

impl Default for CommonDenominator {
    fn default() -> Self {
        Self {
            denom: BigInt::one(),
            numers: Vec::new(),
        }
    }
}

impl CommonDenominator {
    fn push(&mut self, q: &ExactRational) {
        let scale = q.denom() / self.denom.gcd(q.denom());
        if !scale.is_one() {
            for n in &mut self.numers {
                *n *= &scale;
            }
            self.denom *= &scale;
        }
        self.numers.push(q.numer() * (&self.denom / q.denom()));
    }
}

/// Memoized recurrences. Asking for index `n` fills every lower index.
#[derive(Clone, Debug, Default)]
pub struct CoefficientCache {
    b: Vec<ExactRational>,
    b_common: CommonDenominator,
    a: Vec<ExactRational>,
    a_common: CommonDenominator,
    c: Vec<ExactRational>,
    c_common: CommonDenominator,
}

impl CoefficientCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `b_0..=b_n`.
    pub fn b_up_to(&mut self, n: usize) -> &[ExactRational] {
        if self.b.is_empty() {
            self.push_b(ExactRational::one());
        }
        // lcm(2..=m+1), the denominators of the 1/(k+2) weights
        let mut weights_lcm = (2..=self.b.len() as i64).fold(BigInt::one(), |l, j| l.lcm(&BigInt::from(j)));
        while self.b.len() <= n {
            let m = self.b.len();
            weights_lcm = weights_lcm.lcm(&BigInt::from(m as i64));
            // m b_m = 1/(m+1) - sum_{j=1}^{m-1} b_j / (m+1-j)
            let tail: BigInt = (1..m)
                .map(|j| &self.b_common.numers[j] * (&weights_lcm / BigInt::from((m + 1 - j) as i64)))
                .sum();
            let tail = ExactRational::new(tail, &self.b_common.denom * &weights_lcm).expect("nonzero");
            let next = (ExactRational::ratio(1, m as i64 + 1) - tail) / ExactRational::from(m as i64);
            self.push_b(next);
        }
        &self.b[..=n]
    }

    fn push_b(&mut self, q: ExactRational) {
        self.b_common.push(&q);
        self.b.push(q);
    }

    /// `a_0..=a_n`.
    pub fn a_up_to(&mut self, n: usize) -> &[ExactRational] {
        while self.a.len() <= n {
            let q = a_coeff(self.a.len());
            self.a_common.push(&q);
            self.a.push(q);
        }
        &self.a[..=n]
    }

    /// `c_0..=c_n` from `c_n = (1/n) sum_{k<n} a_{n-k-1} c_k`, `c_0 = 1`.
    pub fn c_up_to(&mut self, n: usize) -> &[ExactRational] {
        self.a_up_to(n.saturating_sub(1));
        if self.c.is_empty() {
            self.c_common.push(&ExactRational::one());
            self.c.push(ExactRational::one());
        }
        while self.c.len() <= n {
            let m = self.c.len();
            let sum: BigInt = (0..m)
                .map(|k| &self.a_common.numers[m - k - 1] * &self.c_common.numers[k])
                .sum();
            let denom = &self.a_common.denom * &self.c_common.denom * BigInt::from(m as i64);
            let q = ExactRational::new(sum, denom).expect("nonzero");
            self.c_common.push(&q);
            self.c.push(q);
        }
        &self.c[..=n]
    }
}

/// `b_n`; `b_0 = 1`.
pub fn b_coeff(n: usize) -> ExactRational {
    CoefficientCache::new().b_up_to(n)[n].clone()
}

/// `b_0..=b_n_max`.
pub fn b_series(n_max: usize) -> Vec<ExactRational> {
    CoefficientCache::new().b_up_to(n_max).to_vec()
}

/// Coefficients `c_1..=c_n_max` of `e (1 - sum c_s / (x + shift)^s)`,
/// re-expanded from the b-series:
/// `c_s = Gamma(s) sum_{k=1}^{s} (-(1-shift))^{s-k} b_k / (Gamma(s-k+1) Gamma(k))`.
pub fn shifted_coefficients(shift: &ExactRational, n_max: usize) -> Vec<ExactRational> {
    let b = b_series(n_max);
    convert_b(&b, shift, n_max)
}

fn convert_b(b: &[ExactRational], shift: &ExactRational, n_max: usize) -> Vec<ExactRational> {
    // With delta = -(1 - shift) = p/q, every term of c_s shares the
    // denominator L q^(s-1), L = lcm of the b denominators:
    // c_s = sum_k C(s-1, k-1) p^(s-k) q^(k-1) N_k / (L q^(s-1)).
    let delta = -(ExactRational::one() - shift);
    let (p, q) = (delta.numer().clone(), delta.denom().clone());
    let mut common = CommonDenominator::default();
    for bk in &b[1..=n_max] {
        common.push(bk);
    }
    let p_pows: Vec<BigInt> = (0..n_max).map(|j| p.pow(j as u32)).collect();
    let q_pows: Vec<BigInt> = (0..n_max).map(|j| q.pow(j as u32)).collect();
    let mut binomials = vec![BigInt::one()];
    (1..=n_max)
        .map(|s| {
            if s > 1 {
                // row s-1 of Pascal's triangle from row s-2
                let mut next = Vec::with_capacity(s);
                next.push(BigInt::one());
                next.extend(binomials.windows(2).map(|w| &w[0] + &w[1]));
                next.push(BigInt::one());
                binomials = next;
            }
            let numer: BigInt = (1..=s)
                .map(|k| &binomials[k - 1] * &p_pows[s - k] * &q_pows[k - 1] * &common.numers[k - 1])
                .sum();
            ExactRational::new(numer, &common.denom * &q_pows[s - 1]).expect("nonzero")
        })
        .collect()
}

/// `d_s` by converting the b-series to powers of `1/(x + 11/12)`.
pub fn d_from_b(s: usize) -> Result<ExactRational> {
    if s == 0 {
        return Err(Error::Domain("the d-sequence starts at index 1".into()));
    }
    Ok(d_conversion_series(s).pop().expect("s >= 1"))
}

/// `d_1..=d_s_max` by the conversion route.
pub fn d_conversion_series(s_max: usize) -> Vec<ExactRational> {
    shifted_coefficients(&d_shift(), s_max)
}

/// Coefficient of `t^n` in `ln g(t)`, with `g(t) = ((1 - 11t/12)/(1 + t/12))^(11/12 - 1/t)`.
pub fn log_g_coeff(n: usize) -> ExactRational {
    if n == 0 {
        return ExactRational::one();
    }
    let eleven_pow = BigInt::from(11).pow(n as u32 + 1);
    let sign = |j: usize| if j.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    let first = ExactRational::new(sign(n) * 11 - &eleven_pow, n).expect("n > 0");
    let second = ExactRational::new(sign(n + 1) - &eleven_pow, n + 1).expect("n > 0");
    (first - second) / ExactRational::from_integer(BigInt::from(12).pow(n as u32 + 1))
}

/// Coefficient of `t^n` in `phi = g'/g`.
pub fn a_coeff(n: usize) -> ExactRational {
    let eleven_pow = BigInt::from(11).pow(n as u32 + 2);
    let sign = |j: usize| if j.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    let first = ExactRational::new(sign(n + 1) * 11 - &eleven_pow, n + 1).expect("positive");
    let second = ExactRational::new(sign(n) - &eleven_pow, n + 2).expect("positive");
    ExactRational::new(n + 1, BigInt::from(12).pow(n as u32 + 2)).expect("positive") * (first - second)
}

/// `c_0..=c_n_max` of `g(t) = e sum c_n t^n`.
pub fn c_series(n_max: usize) -> Vec<ExactRational> {
    CoefficientCache::new().c_up_to(n_max).to_vec()
}

/// `d_n = -c_n` from the generating-function recurrence.
pub fn d_from_recurrence(n: usize) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::Domain("the d-sequence starts at index 1".into()));
    }
    Ok(-&c_series(n)[n])
}

/// `d_1..=d_n_max` by the recurrence route.
pub fn d_recurrence_series(n_max: usize) -> Vec<ExactRational> {
    c_series(n_max).into_iter().skip(1).map(|c| -c).collect()
}

pub fn coefficient_table(route: Route, n_max: usize) -> CoefficientTable {
    let values: Vec<ExactRational> = match route {
        Route::BSeries => b_series(n_max),
        Route::DConversion => d_conversion_series(n_max),
        Route::DRecurrence => d_recurrence_series(n_max),
        Route::ASequence => CoefficientCache::new().a_up_to(n_max).to_vec(),
        Route::LogG => (0..=n_max).map(log_g_coeff).collect(),
    };
    let first = route.first_index();
    CoefficientTable {
        route,
        entries: values.into_iter().enumerate().map(|(i, v)| (i + first, v)).collect(),
    }
}

/// Looks a route up by name; the table counterpart of [`coefficient_table`].
pub fn coefficient_table_by_name(route: &str, n_max: usize) -> Result<CoefficientTable> {
    Ok(coefficient_table(route.parse()?, n_max))
}
