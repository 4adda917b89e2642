//! The logarithmic integral, its proportional-primes variant, and exact
//! integral identities checked numerically.
//!
//! Everything here follows the convention `Li(z) = 0` for `z <= 2`, matching
//! the prime counting function's `pi(z) = 0` for `z < 2`. Reversed
//! integration bounds contribute with negative sign.

use serde::Serialize;

use crate::counting::{isqrt, ClassConstraint, RatioParam};
use crate::error::{Error, Result};
pub use crate::quadrature::QuadratureSpec;
use crate::quadrature::{integrate, integrate_signed};
use crate::sieve::PrimeTables;

/// `Li(x) = integral of dt/log t from 2 to x`, zero for `x <= 2`.
pub fn li(x: f64, spec: &QuadratureSpec) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("li requires x >= 0, got {x}")));
    }
    if x <= 2.0 {
        return Ok(0.0);
    }
    integrate(|t| 1.0 / t.ln(), 2.0, x, spec)
}

fn fr_integrand(t: f64, r: f64) -> f64 {
    ((r * t).sqrt().ln().ln() - (t / r).sqrt().ln().ln()) / t.ln()
}

/// The variant of the logarithmic integral for proportional prime pairs:
/// the integral of `(log log sqrt(r t) - log log sqrt(t/r)) / log t` from
/// `2r` to `x`. Defined for `x >= 2r`; nonnegative and increasing in `x`.
pub fn f_r(x: f64, r: RatioParam, spec: &QuadratureSpec) -> Result<f64> {
    let rf = r.as_f64();
    if x.is_nan() || x < 2.0 * rf {
        return Err(Error::Domain(format!(
            "f_r requires x >= 2r = {}, got {x}",
            2.0 * rf
        )));
    }
    integrate(|t| fr_integrand(t, rf), 2.0 * rf, x, spec)
}

/// The antiderivative-style expression
/// `Li(sqrt x)^2 / 2 - int_{2r}^{sqrt(rx)} Li(t/r)/log t + int_{sqrt x}^{sqrt(rx)} Li(x/t)/log t`.
///
/// With the `Li(z <= 2) = 0` convention this vanishes at small arguments
/// (`g_r(4, 2) = 0`) and has derivative [`gr_derivative`] for `x >= 4r`, so
/// it differs from [`f_r`] by a constant on that range.
pub fn g_r(x: f64, r: RatioParam, spec: &QuadratureSpec) -> Result<f64> {
    if x.is_nan() || x < 2.0 {
        return Err(Error::Domain(format!("g_r requires x >= 2, got {x}")));
    }
    let rf = r.as_f64();
    let sx = x.sqrt();
    let srx = (rf * x).sqrt();
    let t1 = 0.5 * li(sx, spec)?.powi(2);
    let inner = *spec;
    let t2 = integrate_signed(
        |t| match li(t / rf, &inner) {
            Ok(v) => v / t.ln(),
            Err(_) => f64::NAN,
        },
        2.0 * rf,
        srx,
        spec,
    )?;
    let t3 = integrate_signed(
        |t| match li(x / t, &inner) {
            Ok(v) => v / t.ln(),
            Err(_) => f64::NAN,
        },
        sx,
        srx,
        spec,
    )?;
    Ok(t1 - t2 + t3)
}

/// Closed form of the derivative shared by `F_r` and `G_r`:
/// `(log log sqrt(rx) - log log sqrt(x/r)) / log x`, for `x > r`.
pub fn gr_derivative(x: f64, r: RatioParam) -> Result<f64> {
    let rho = r.as_f64().ln();
    let l = x.ln();
    if l.is_nan() || l <= rho {
        return Err(Error::Domain(format!(
            "gr_derivative requires x > r, got x = {x}, r = {r}"
        )));
    }
    Ok(((l + rho) / (l - rho)).ln() / l)
}

/// The `m`-term truncation of the series form of [`gr_derivative`]:
/// `(1/log x) * sum over l = 1..=m of (2/(2l-1)) (log r / log x)^(2l-1)`.
pub fn gr_derivative_truncated(x: f64, r: RatioParam, m: u32) -> Result<f64> {
    let rho = r.as_f64().ln();
    let l = x.ln();
    if l.is_nan() || l <= rho {
        return Err(Error::Domain(format!(
            "gr_derivative requires x > r, got x = {x}, r = {r}"
        )));
    }
    let u = rho / l;
    let mut sum = 0.0;
    for k in 1..=m {
        let odd = (2 * k - 1) as f64;
        sum += 2.0 / odd * u.powi((2 * k - 1) as i32);
    }
    Ok(sum / l)
}

/// Truncated expansion of `Li`: `sum_{k=1}^{n-1} (k-1)! x / log^k x`.
pub fn li_expansion(x: f64, n: u32) -> Result<f64> {
    if x.is_nan() || x <= 1.0 {
        return Err(Error::Domain(format!(
            "li_expansion requires x > 1, got {x}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParam("li_expansion needs n >= 2".into()));
    }
    let l = x.ln();
    let mut sum = 0.0;
    let mut fact = 1.0; // (k-1)!
    let mut pow = l;
    for k in 1..n {
        if k > 1 {
            fact *= (k - 1) as f64;
            pow *= l;
        }
        sum += fact * x / pow;
    }
    Ok(sum)
}

/// Tail of the odd log series:
/// `E_m(u) = log((1+u)/(1-u)) - 2 sum_{l=1}^m u^(2l-1)/(2l-1)`,
/// which satisfies `0 < E_m(u) < 2 u^(2m+1) / (1 - u^2)` for `0 < u < 1`.
pub fn em_tail(u: f64, m: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!(
            "em_tail requires 0 <= u < 1, got {u}"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidParam("em_tail needs m >= 1".into()));
    }
    let full = (2.0 * u / (1.0 - u)).ln_1p();
    let mut partial = 0.0;
    for l in 1..=m {
        let odd = (2 * l - 1) as f64;
        partial += 2.0 * u.powi((2 * l - 1) as i32) / odd;
    }
    Ok(full - partial)
}

/// Landau's main term for integers with `k` prime factors:
/// `x / log x * (log log x)^(k-1) / (k-1)!`.
pub fn landau_estimate(x: f64, k: u32) -> Result<f64> {
    if x.is_nan() || x <= std::f64::consts::E {
        return Err(Error::Domain(format!(
            "landau_estimate requires x > e, got {x}"
        )));
    }
    if k < 1 {
        return Err(Error::InvalidParam("landau_estimate needs k >= 1".into()));
    }
    let l = x.ln();
    let ll = l.ln();
    let mut fact = 1.0;
    for i in 2..k {
        fact *= i as f64;
    }
    Ok(x / l * ll.powi((k - 1) as i32) / fact)
}

/// Measured left/right discrepancy of one exact identity.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidual {
    pub identity_label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
}

impl IdentityResidual {
    fn new(label: &str, lhs: f64, rhs: f64) -> Self {
        let abs_residual = (lhs - rhs).abs();
        IdentityResidual {
            identity_label: label.to_string(),
            lhs,
            rhs,
            abs_residual,
            rel_residual: abs_residual / lhs.abs().max(1.0),
        }
    }
}

/// Integrate a step-function integrand over a fine uniform partition, each
/// chunk adaptively. Adaptive refinement from one wide panel can settle
/// early around jump points; starting from narrow chunks bounds what any
/// such miss can cost, without placing panels at the (known) jump
/// locations.
fn integrate_stepped<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if a >= b {
        return Ok(0.0);
    }
    let chunks = 1024usize;
    let mut total = 0.0;
    for i in 0..chunks {
        let lo = a + (b - a) * i as f64 / chunks as f64;
        let hi = a + (b - a) * (i + 1) as f64 / chunks as f64;
        total += integrate(&f, lo, hi, spec)?;
    }
    Ok(total)
}

/// Largest `m` with `m^2 * num <= x * den`, i.e. `floor(sqrt(x / r))`.
fn sqrt_x_over_r_floor(x: u64, r: RatioParam) -> u64 {
    let target = x as u128 * r.den() as u128;
    let num = r.num() as u128;
    let mut m = ((target as f64 / num as f64).sqrt()) as u64;
    while m > 0 && (m as u128) * (m as u128) * num > target {
        m -= 1;
    }
    while ((m + 1) as u128) * ((m + 1) as u128) * num <= target {
        m += 1;
    }
    m
}

/// Check the partial-summation identities relating sums of `Li` over primes
/// to integrals of the step function `pi`, plus the closed form
/// `int_2^{sqrt x} Li(t)/log t dt = Li(sqrt x)^2 / 2`.
///
/// Each residual compares two fully independent code paths: direct
/// summation over the prime tables on the left, quadrature of a
/// step-function integrand on the right.
pub fn verify_summation_identities(
    tables: &PrimeTables,
    x: u64,
    r: RatioParam,
    c1: ClassConstraint,
    spec: &QuadratureSpec,
) -> Result<Vec<IdentityResidual>> {
    let rf = r.as_f64();
    let xf = x as f64;
    if xf < 2.0 * rf {
        return Err(Error::Domain(format!(
            "identities need x >= 2r, got x = {x}, r = {r}"
        )));
    }
    let sx_floor = isqrt(x);
    if tables.limit() < sx_floor {
        return Err(Error::Capacity(format!(
            "identities at x = {x} need tables up to {sx_floor}, built limit is {}",
            tables.limit()
        )));
    }
    let b_floor = sqrt_x_over_r_floor(x, r);
    let srx = (rf * xf).sqrt();
    let sx = xf.sqrt();
    let inner = *spec;

    let pi_c1 = |y: u64| -> Result<u64> { tables.prime_count_ap(y, c1.d(), c1.a()) };
    let step = |z: f64| -> f64 {
        if z < 2.0 {
            0.0
        } else {
            // z stays within the table limit for all integrands below
            pi_c1(z as u64).map(|c| c as f64).unwrap_or(f64::NAN)
        }
    };

    let mut out = Vec::with_capacity(3);

    // sum of Li(r p) over p <= sqrt(x/r)  vs
    // pi(sqrt(x/r)) Li(sqrt(rx)) - int_2^{sqrt(rx)} pi(t/r)/log t dt
    {
        let mut lhs = 0.0;
        for &p in tables.primes() {
            if p > b_floor {
                break;
            }
            if c1.matches(p) {
                lhs += li(rf * p as f64, spec)?;
            }
        }
        let tail = integrate_stepped(|t| step(t / rf) / t.ln(), 2.0, srx, spec)?;
        let rhs = pi_c1(b_floor)? as f64 * li(srx, spec)? - tail;
        out.push(IdentityResidual::new("li_sum_rp", lhs, rhs));
    }

    // sum of Li(x/p) over sqrt(x/r) < p <= sqrt(x)  vs
    // pi(sqrt x) Li(sqrt x) - pi(sqrt(x/r)) Li(sqrt(rx)) + int pi(x/t)/log t dt
    {
        let mut lhs = 0.0;
        for &p in tables.primes() {
            if p > sx_floor {
                break;
            }
            if p > b_floor && c1.matches(p) {
                lhs += li(xf / p as f64, spec)?;
            }
        }
        let tail = integrate_stepped(|t| step(xf / t) / t.ln(), sx, srx, spec)?;
        let rhs = pi_c1(sx_floor)? as f64 * li(sx, spec)? - pi_c1(b_floor)? as f64 * li(srx, spec)?
            + tail;
        out.push(IdentityResidual::new("li_sum_x_over_p", lhs, rhs));
    }

    // int_2^{sqrt x} Li(t)/log t dt = Li(sqrt x)^2 / 2
    {
        let lhs = if sx > 2.0 {
            integrate(
                |t| match li(t, &inner) {
                    Ok(v) => v / t.ln(),
                    Err(_) => f64::NAN,
                },
                2.0,
                sx,
                spec,
            )?
        } else {
            0.0
        };
        let rhs = 0.5 * li(sx, spec)?.powi(2);
        out.push(IdentityResidual::new("half_li_squared", lhs, rhs));
    }

    Ok(out)
}
