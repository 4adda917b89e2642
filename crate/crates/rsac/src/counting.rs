//! Exact counts of products of two proportional primes.
//!
//! An integer `pq` with primes `p < q <= r*p` is counted by two independent
//! routes: a brute-force double loop over prime pairs, and a decomposition
//! into three sums of `pi`-queries that only needs primes up to `sqrt(r*x)`.
//! The ratio bound `r` is an exact rational so that every range boundary
//! (`sqrt(x)`, `sqrt(x/r)`, `r*p`, `x/p`) is decided by integer comparisons,
//! never by floating point.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analytic::{self, QuadratureSpec};
use crate::bias::euler_phi;
use crate::coefficients;
use crate::error::{Error, Result};
use crate::sieve::PrimeTables;

/// The proportionality bound `r = num/den > 1` as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RatioParam {
    num: u64,
    den: u64,
}

impl RatioParam {
    /// Build a reduced rational; fails unless `num/den > 1`.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParam("ratio denominator is zero".into()));
        }
        let g = gcd(num, den);
        let (num, den) = (num / g, den / g);
        if num <= den {
            return Err(Error::InvalidParam(format!(
                "ratio {num}/{den} must exceed 1"
            )));
        }
        Ok(RatioParam { num, den })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// The ratio as a float, for analytic evaluations.
    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Whether `q <= r*p`, exactly.
    pub fn q_le_rp(&self, q: u64, p: u64) -> bool {
        (q as u128) * (self.den as u128) <= (self.num as u128) * (p as u128)
    }

    /// `floor(r*p)`.
    pub fn rp_floor(&self, p: u64) -> u64 {
        ((self.num as u128 * p as u128) / self.den as u128) as u64
    }

    /// Whether `p <= sqrt(x/r)`, i.e. `p^2 * num <= x * den`, exactly.
    pub fn p_le_sqrt_x_over_r(&self, p: u64, x: u64) -> bool {
        (p as u128) * (p as u128) * (self.num as u128) <= (x as u128) * (self.den as u128)
    }

    /// `floor(sqrt(r*x))`: the largest `m` with `m^2 * den <= x * num`.
    pub fn sqrt_rx_floor(&self, x: u64) -> u64 {
        let target = x as u128 * self.num as u128;
        let den = self.den as u128;
        let mut m = ((target as f64 / den as f64).sqrt()) as u64;
        while m > 0 && (m as u128) * (m as u128) * den > target {
            m -= 1;
        }
        while ((m + 1) as u128) * ((m + 1) as u128) * den <= target {
            m += 1;
        }
        m
    }
}

impl fmt::Display for RatioParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for RatioParam {
    type Err = Error;

    /// Parse `"num/den"`; a bare integer is taken as `num/1`.
    fn from_str(s: &str) -> Result<Self> {
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num = n
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::InvalidParam(format!("bad ratio {s:?}")))?;
        let den = d
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::InvalidParam(format!("bad ratio {s:?}")))?;
        RatioParam::new(num, den)
    }
}

/// A residue-class restriction `p = a (mod d)`. `d = 1` places no
/// restriction (and forces `a = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassConstraint {
    a: u64,
    d: u64,
}

impl ClassConstraint {
    pub fn new(a: u64, d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParam("class modulus must be >= 1".into()));
        }
        if a >= d {
            return Err(Error::InvalidParam(format!("class {a} not in 0..{d}")));
        }
        Ok(ClassConstraint { a, d })
    }

    /// The unrestricted constraint (`d = 1`).
    pub fn all() -> Self {
        ClassConstraint { a: 0, d: 1 }
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_trivial(&self) -> bool {
        self.d == 1
    }

    pub fn matches(&self, p: u64) -> bool {
        p % self.d == self.a
    }

    fn check_registered(&self, tables: &PrimeTables) -> Result<()> {
        if self.d == 1 || tables.moduli().contains(&self.d) {
            Ok(())
        } else {
            Err(Error::UnregisteredModulus(self.d))
        }
    }

    fn count(&self, tables: &PrimeTables, y: u64) -> Result<u64> {
        tables.prime_count_ap(y, self.d, self.a)
    }
}

impl fmt::Display for ClassConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.a, self.d)
    }
}

impl FromStr for ClassConstraint {
    type Err = Error;

    /// Parse `"a:d"`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, d) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParam(format!("class {s:?} is not a:d")))?;
        let a = a
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::InvalidParam(format!("bad class {s:?}")))?;
        let d = d
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::InvalidParam(format!("bad class {s:?}")))?;
        ClassConstraint::new(a, d)
    }
}

/// `floor(sqrt(n))`.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r > 0 && r.checked_mul(r).is_none_or(|s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

fn require_limit(tables: &PrimeTables, needed: u64, what: &str) -> Result<()> {
    if tables.limit() < needed {
        Err(Error::Capacity(format!(
            "{what} needs tables up to {needed}, built limit is {}",
            tables.limit()
        )))
    } else {
        Ok(())
    }
}

/// Brute-force count of `#{pq <= x : p < q <= r*p}` by a double loop over
/// prime pairs. This is the ground-truth oracle for the decomposed route.
pub fn count_rsa_exact(tables: &PrimeTables, x: u64, r: RatioParam) -> Result<u64> {
    require_limit(tables, r.sqrt_rx_floor(x), "count_rsa_exact")?;
    let primes = tables.primes();
    let mut count = 0u64;
    for (i, &p) in primes.iter().enumerate() {
        if p * p > x {
            break;
        }
        for &q in &primes[i + 1..] {
            if !r.q_le_rp(q, p) || p as u128 * q as u128 > x as u128 {
                break;
            }
            count += 1;
        }
    }
    Ok(count)
}

/// The same count via the three-sum decomposition
/// `-sum pi(p) + sum pi(r*p) + sum pi(x/p)`, using only `pi`-queries at
/// arguments up to `sqrt(r*x)`.
pub fn count_rsa_decomposed(tables: &PrimeTables, x: u64, r: RatioParam) -> Result<u64> {
    require_limit(tables, r.sqrt_rx_floor(x), "count_rsa_decomposed")?;
    let primes = tables.primes();
    let mut acc = 0i128;
    for (i, &p) in primes.iter().enumerate() {
        if p * p > x {
            break;
        }
        acc -= (i as i128) + 1; // pi(p) = index + 1
        let upper = if r.p_le_sqrt_x_over_r(p, x) {
            r.rp_floor(p)
        } else {
            x / p
        };
        acc += tables.prime_count(upper)? as i128;
    }
    Ok(acc as u64)
}

/// Class-restricted count `#{pq <= x : p < q <= r*p, p in c1, q in c2}`,
/// computed by the decomposition with `pi(.; d, a)`-queries.
pub fn count_rsa_classes(
    tables: &PrimeTables,
    x: u64,
    r: RatioParam,
    c1: ClassConstraint,
    c2: ClassConstraint,
) -> Result<u64> {
    c1.check_registered(tables)?;
    c2.check_registered(tables)?;
    require_limit(tables, r.sqrt_rx_floor(x), "count_rsa_classes")?;
    let primes = tables.primes();
    let mut acc = 0i128;
    for &p in primes {
        if p * p > x {
            break;
        }
        if !c1.matches(p) {
            continue;
        }
        acc -= c2.count(tables, p)? as i128;
        let upper = if r.p_le_sqrt_x_over_r(p, x) {
            r.rp_floor(p)
        } else {
            x / p
        };
        acc += c2.count(tables, upper)? as i128;
    }
    Ok(acc as u64)
}

/// Filtered double-loop oracle for [`count_rsa_classes`].
pub fn count_rsa_classes_oracle(
    tables: &PrimeTables,
    x: u64,
    r: RatioParam,
    c1: ClassConstraint,
    c2: ClassConstraint,
) -> Result<u64> {
    require_limit(tables, r.sqrt_rx_floor(x), "count_rsa_classes_oracle")?;
    let primes = tables.primes();
    let mut count = 0u64;
    for (i, &p) in primes.iter().enumerate() {
        if p * p > x {
            break;
        }
        if !c1.matches(p) {
            continue;
        }
        for &q in &primes[i + 1..] {
            if !r.q_le_rp(q, p) || p as u128 * q as u128 > x as u128 {
                break;
            }
            if c2.matches(q) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Count `#{pq <= x : p < q, p in c1, q in c2}` with no proportionality
/// bound, as `sum over p of [pi_c2(x/p) - pi_c2(p)]`. With `odd_only`, the
/// smaller factor starts at 3.
pub fn count_semiprime_pairs(
    tables: &PrimeTables,
    x: u64,
    c1: ClassConstraint,
    c2: ClassConstraint,
    odd_only: bool,
) -> Result<u64> {
    c1.check_registered(tables)?;
    c2.check_registered(tables)?;
    let primes = tables.primes();
    let mut count = 0u64;
    for &p in primes {
        if p * p > x {
            break;
        }
        if (odd_only && p < 3) || !c1.matches(p) {
            continue;
        }
        let hi = x / p;
        require_limit(tables, hi, "count_semiprime_pairs")?;
        count += c2.count(tables, hi)? - c2.count(tables, p)?;
    }
    Ok(count)
}

/// One `(x, r, classes)` evaluation: the exact count next to the analytic
/// main term and truncated-series values, with relative deviations.
#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub x: u64,
    pub r: RatioParam,
    pub c1: ClassConstraint,
    pub c2: ClassConstraint,
    /// Exact class-restricted count (equals `C_r(x)` for trivial classes).
    pub exact: u64,
    /// Main term `F_r(x)`; absent when `x < 2r`.
    pub fr_value: Option<f64>,
    /// Truncated series values, keyed by the truncation order `n`.
    pub series_values: BTreeMap<u32, f64>,
    /// Relative deviations `phi(d1) phi(d2) exact / prediction - 1`.
    pub deviations: BTreeMap<String, f64>,
}

impl CountReport {
    /// Evaluate everything for one point. Series orders are `n = 2, 4, 6`.
    pub fn compute(
        tables: &PrimeTables,
        x: u64,
        r: RatioParam,
        c1: ClassConstraint,
        c2: ClassConstraint,
        spec: &QuadratureSpec,
    ) -> Result<CountReport> {
        let exact = count_rsa_classes(tables, x, r, c1, c2)?;
        let scale = (euler_phi(c1.d()) * euler_phi(c2.d())) as f64;
        let normalized = exact as f64 * scale;

        let fr_value = if (x as f64) >= 2.0 * r.as_f64() {
            Some(analytic::f_r(x as f64, r, spec)?)
        } else {
            None
        };

        let mut series_values = BTreeMap::new();
        let mut deviations = BTreeMap::new();
        if let Some(fr) = fr_value {
            if fr > 0.0 {
                deviations.insert("fr".to_string(), normalized / fr - 1.0);
            }
        }
        for n in [2u32, 4, 6] {
            let s = coefficients::series_eval(x as f64, r.as_f64(), n)?;
            series_values.insert(n, s);
            if s > 0.0 {
                deviations.insert(format!("series_{n}"), normalized / s - 1.0);
            }
        }

        Ok(CountReport {
            x,
            r,
            c1,
            c2,
            exact,
            fr_value,
            series_values,
            deviations,
        })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
