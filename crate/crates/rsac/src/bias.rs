//! Residue-class bias measurements for semiprimes and proportional pairs.
//!
//! Products of two odd primes lean measurably toward `p = q = 3 (mod 4)`;
//! proportional pairs show far less of this lean. This module measures both
//! effects from sieve counts and runs the race experiment over a geometric
//! grid of sample points.

use serde::Serialize;

use crate::counting::{
    count_rsa_classes, count_rsa_decomposed, count_semiprime_pairs, ClassConstraint, RatioParam,
};
use crate::error::{Error, Result};
use crate::sieve::PrimeTables;

/// Reference constant for the expected semiprime bias
/// `r(x) ~ 1 + beta / log log x`. Documentation only; never used as an
/// oracle.
pub const BETA: f64 = 0.334;

/// Euler's totient, by trial factorization.
pub fn euler_phi(d: u64) -> u64 {
    let mut n = d;
    let mut phi = d.max(1);
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            phi -= phi / p;
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

/// The classical semiprime bias ratio at `x`:
/// `#{pq <= x : p = q = 3 (mod 4)}` over a quarter of
/// `#{pq <= x : p < q both odd}`.
///
/// Both counts range over unordered pairs of distinct odd primes; `p = 2`
/// and squares are excluded. Needs tables up to `x/3` and modulus 4.
pub fn dummit_ratio(tables: &PrimeTables, x: u64) -> Result<f64> {
    let c34 = ClassConstraint::new(3, 4)?;
    let all = ClassConstraint::all();
    let numerator = count_semiprime_pairs(tables, x, c34, c34, false)?;
    let odd_pairs = count_semiprime_pairs(tables, x, all, all, true)?;
    if odd_pairs == 0 {
        return Err(Error::UndefinedRatio(format!(
            "no odd semiprimes up to {x} (need x >= 15)"
        )));
    }
    Ok(numerator as f64 / (odd_pairs as f64 / 4.0))
}

/// The proportional-pair analogue:
/// `phi(d1) phi(d2) D_r(x; c1, c2) / C_r(x)`. Exactly 1 for trivial classes.
pub fn rsa_bias_ratio(
    tables: &PrimeTables,
    x: u64,
    r: RatioParam,
    c1: ClassConstraint,
    c2: ClassConstraint,
) -> Result<f64> {
    let total = count_rsa_decomposed(tables, x, r)?;
    if total == 0 {
        return Err(Error::UndefinedRatio(format!(
            "no proportional pairs up to {x} for r = {r}"
        )));
    }
    let restricted = count_rsa_classes(tables, x, r, c1, c2)?;
    let scale = (euler_phi(c1.d()) * euler_phi(c2.d())) as f64;
    Ok(scale * restricted as f64 / total as f64)
}

/// A pair of class constraints `(for p, for q)` entering a race.
pub type ClassPair = (ClassConstraint, ClassConstraint);

/// One sample point of a race between two class pairs.
#[derive(Debug, Clone, Serialize)]
pub struct RaceRecord {
    pub x: u64,
    pub count_pair1: u64,
    pub count_pair2: u64,
    /// `count_pair1 - count_pair2`.
    pub lead: i64,
    /// Fraction of grid points processed so far with a strictly positive
    /// lead. On a geometric grid all points carry equal log-weight, so this
    /// is a crude logarithmic-density proxy.
    pub cumulative_lead_fraction: f64,
}

/// Ascending geometric grid of integer sample points.
pub fn geometric_grid(lo: u64, hi: u64, points: u32) -> Result<Vec<u64>> {
    if lo < 1 || hi < lo {
        return Err(Error::InvalidParam(format!("bad grid bounds {lo}..{hi}")));
    }
    if points < 1 {
        return Err(Error::InvalidParam("grid needs at least one point".into()));
    }
    if points == 1 || lo == hi {
        return Ok(vec![hi]);
    }
    let ratio = (hi as f64 / lo as f64).powf(1.0 / (points as f64 - 1.0));
    let mut grid: Vec<u64> = (0..points)
        .map(|i| (lo as f64 * ratio.powi(i as i32)).round() as u64)
        .collect();
    grid[0] = lo;
    let last = grid.len() - 1;
    grid[last] = hi;
    Ok(grid)
}

/// Race two class pairs over an ascending grid: at each point, both
/// restricted proportional-pair counts, their difference, and the running
/// fraction of points where the first pair leads.
pub fn race(
    tables: &PrimeTables,
    r: RatioParam,
    pair1: ClassPair,
    pair2: ClassPair,
    grid: &[u64],
) -> Result<Vec<RaceRecord>> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam("race grid must be ascending".into()));
    }
    let mut records = Vec::with_capacity(grid.len());
    let mut leads = 0u64;
    for (i, &x) in grid.iter().enumerate() {
        let count_pair1 = count_rsa_classes(tables, x, r, pair1.0, pair1.1)?;
        let count_pair2 = count_rsa_classes(tables, x, r, pair2.0, pair2.1)?;
        let lead = count_pair1 as i64 - count_pair2 as i64;
        if lead > 0 {
            leads += 1;
        }
        records.push(RaceRecord {
            x,
            count_pair1,
            count_pair2,
            lead,
            cumulative_lead_fraction: leads as f64 / (i as f64 + 1.0),
        });
    }
    Ok(records)
}
