//! Exact expansion coefficients.
//!
//! The coefficient of `x / log^(k+1) x` in the expansion of the counting
//! main term is an odd polynomial `a_k` in `rho = log r`, with rational
//! coefficients `2 k! / ((2j-1)! (2j-1))`. Everything in this module is
//! exact big-integer/rational arithmetic; floats appear only in the final
//! `eval` calls.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A sparse polynomial in `rho` with exact rational coefficients,
/// stored as exponent -> coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RhoPoly {
    terms: BTreeMap<u32, BigRational>,
}

impl RhoPoly {
    pub fn zero() -> Self {
        RhoPoly::default()
    }

    /// The constant polynomial.
    pub fn constant(c: BigRational) -> Self {
        let mut p = RhoPoly::zero();
        p.add_term(0, c);
        p
    }

    /// A single term `c * rho^exp`.
    pub fn term(exp: u32, c: BigRational) -> Self {
        let mut p = RhoPoly::zero();
        p.add_term(exp, c);
        p
    }

    pub fn add_term(&mut self, exp: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn add(&mut self, other: &RhoPoly) {
        for (&e, c) in &other.terms {
            self.add_term(e, c.clone());
        }
    }

    pub fn scaled(&self, factor: &BigRational) -> RhoPoly {
        let mut out = RhoPoly::zero();
        for (&e, c) in &self.terms {
            out.add_term(e, c * factor);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exponent/coefficient pairs in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    /// All coefficients nonnegative?
    pub fn is_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&e, c)| rational_to_f64(c) * rho.powi(e as i32))
            .sum()
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn superscript(n: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

impl fmt::Display for RhoPoly {
    /// Renders like `240ρ + 40ρ³/3 + 2ρ⁵/5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let var = match e {
                0 => String::new(),
                1 => "ρ".to_string(),
                _ => format!("ρ{}", superscript(e)),
            };
            let num = c.numer();
            let den = c.denom();
            if den.is_one() {
                if var.is_empty() {
                    write!(f, "{num}")?;
                } else {
                    write!(f, "{num}{var}")?;
                }
            } else {
                write!(f, "{num}{var}/{den}")?;
            }
        }
        Ok(())
    }
}

/// The polynomial `a_k`: coefficients of the odd powers `rho^(2j-1)` for
/// `j = 1 ..= floor((k+1)/2)`, each equal to `2 k! / ((2j-1)! (2j-1))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AkPolynomial {
    k: u32,
    coeffs: Vec<BigRational>,
}

impl AkPolynomial {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Coefficient of `rho^(2j-1)` for `j = 1..`, in order.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn to_rho_poly(&self) -> RhoPoly {
        let mut p = RhoPoly::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            p.add_term(2 * (i as u32 + 1) - 1, c.clone());
        }
        p
    }

    /// Numeric value at `rho = log r`.
    pub fn eval(&self, r: f64) -> f64 {
        self.to_rho_poly().eval(r.ln())
    }
}

impl fmt::Display for AkPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_rho_poly().fmt(f)
    }
}

fn factorial(n: u32) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=n as u64 {
        f *= i;
    }
    f
}

/// Exact coefficient `a_{k,j} = 2 k! / ((2j-1)! (2j-1))`.
pub fn ak_coefficient(k: u32, j: u32) -> BigRational {
    let num = BigInt::from(2) * factorial(k);
    let den = factorial(2 * j - 1) * BigInt::from(2 * j - 1);
    BigRational::new(num, den)
}

/// Construct `a_k` exactly. Requires `k >= 1`.
pub fn ak_polynomial(k: u32) -> Result<AkPolynomial> {
    if k < 1 {
        return Err(Error::InvalidParam("ak_polynomial needs k >= 1".into()));
    }
    let coeffs = (1..=k.div_ceil(2)).map(|j| ak_coefficient(k, j)).collect();
    Ok(AkPolynomial { k, coeffs })
}

/// Numeric value of `a_k(r)`.
pub fn ak_eval(k: u32, r: f64) -> Result<f64> {
    Ok(ak_polynomial(k)?.eval(r))
}

/// Truncated expansion of the counting function:
/// `sum_{k=1}^{n-1} a_k(r) x / log^(k+1) x`. For `n = 2` this is the
/// leading term `2 x log r / log^2 x`.
pub fn series_eval(x: f64, r: f64, n: u32) -> Result<f64> {
    if x.is_nan() || x <= 1.0 {
        return Err(Error::Domain(format!(
            "series_eval requires x > 1, got {x}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParam("series_eval needs n >= 2".into()));
    }
    let l = x.ln();
    let mut sum = 0.0;
    let mut pow = l * l;
    for k in 1..n {
        sum += ak_eval(k, r)? * x / pow;
        pow *= l;
    }
    Ok(sum)
}

/// A sequence of nonnegative coefficients (rationals, or polynomials in
/// `rho`) feeding the coefficient-transport lemma.
#[derive(Debug, Clone)]
pub struct BSequence {
    entries: Vec<RhoPoly>,
}

impl BSequence {
    /// Build from exact rationals.
    pub fn from_rationals(values: Vec<BigRational>) -> Result<Self> {
        Self::from_polys(values.into_iter().map(RhoPoly::constant).collect())
    }

    /// Build from polynomials in `rho`; every coefficient must be
    /// nonnegative.
    pub fn from_polys(entries: Vec<RhoPoly>) -> Result<Self> {
        if entries.iter().any(|p| !p.is_nonnegative()) {
            return Err(Error::InvalidParam(
                "b-sequence entries must be nonnegative".into(),
            ));
        }
        Ok(BSequence { entries })
    }

    /// The choice that reproduces the `a_k`: `b_j = 2 rho^(j-1) / (j-1)`
    /// for even `j`, zero for odd `j`.
    pub fn even_index_log_powers(len: u32) -> Self {
        let entries = (1..=len)
            .map(|j| {
                if j % 2 == 0 {
                    RhoPoly::term(
                        j - 1,
                        BigRational::new(BigInt::from(2), BigInt::from(j - 1)),
                    )
                } else {
                    RhoPoly::zero()
                }
            })
            .collect();
        BSequence { entries }
    }

    pub fn get(&self, j: u32) -> RhoPoly {
        self.entries
            .get(j as usize - 1)
            .cloned()
            .unwrap_or_else(RhoPoly::zero)
    }
}

/// Coefficients of `x / log^k x` produced by the transport lemma:
/// `c_k = sum_{j=1}^{k} b_j (k-1)!/(j-1)!` for `k = 1 .. n-1`, exact.
pub fn nb_coefficients(b: &BSequence, n: u32) -> Result<Vec<RhoPoly>> {
    if n < 2 {
        return Err(Error::InvalidParam("nb_coefficients needs n >= 2".into()));
    }
    let mut out = Vec::with_capacity(n as usize - 1);
    for k in 1..n {
        let mut c = RhoPoly::zero();
        for j in 1..=k {
            // (k-1)! / (j-1)! = product of j..k-1
            let mut ratio = BigInt::one();
            for i in j..k {
                ratio *= i as u64;
            }
            c.add(&b.get(j).scaled(&BigRational::from_integer(ratio)));
        }
        out.push(c);
    }
    Ok(out)
}

/// `mu(j) = min { k >= 2j-1 : (2j-1)! (2j-1) divides k! }`, by brute-force
/// search with exact big-integer divisibility.
pub fn mu(j: u32) -> Result<u64> {
    if j < 1 {
        return Err(Error::InvalidParam("mu needs j >= 1".into()));
    }
    let d = 2 * j as u64 - 1;
    let target = {
        let mut f = BigUint::one();
        for i in 2..=d {
            f *= i;
        }
        f * BigUint::from(d)
    };
    let mut k = d;
    let mut kfact = {
        let mut f = BigUint::one();
        for i in 2..=d {
            f *= i;
        }
        f
    };
    loop {
        if (&kfact % &target).is_zero() {
            return Ok(k);
        }
        k += 1;
        kfact *= BigUint::from(k);
    }
}

/// Closed form for [`mu`] when every exponent in the factorization of
/// `2j-1 = prod p^(e_p)` satisfies `e_p <= p`: the value is
/// `2j-1 + max(e_p * p)`. Returns `None` when the hypothesis fails.
pub fn mu_formula(j: u32) -> Result<Option<u64>> {
    if j < 1 {
        return Err(Error::InvalidParam("mu_formula needs j >= 1".into()));
    }
    if j == 1 {
        return Ok(Some(1));
    }
    let mut m = 2 * j as u64 - 1;
    let base = m;
    let mut best = 0u64;
    let mut p = 3u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0u64;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            if e > p {
                return Ok(None);
            }
            best = best.max(e * p);
        }
        p += 2;
    }
    if m > 1 {
        best = best.max(m); // e_p = 1 <= p
    }
    Ok(Some(base + best))
}

/// The first ten `a_k` polynomials.
pub fn table1() -> Vec<AkPolynomial> {
    (1..=10)
        .map(|k| ak_polynomial(k).expect("k >= 1"))
        .collect()
}

/// Plain-text rendering of [`table1`], one `k  a_k` line per row.
pub fn table1_text() -> String {
    let mut out = String::new();
    for row in table1() {
        out.push_str(&format!("{:>2}  {}\n", row.k(), row));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Reference coefficient data: `(k, [(numerator, denominator); ...])`.
    const TABLE1_DATA: [(u32, &[(i64, i64)]); 10] = [
        (1, &[(2, 1)]),
        (2, &[(4, 1)]),
        (3, &[(12, 1), (2, 3)]),
        (4, &[(48, 1), (8, 3)]),
        (5, &[(240, 1), (40, 3), (2, 5)]),
        (6, &[(1440, 1), (80, 1), (12, 5)]),
        (7, &[(10080, 1), (560, 1), (84, 5), (2, 7)]),
        (8, &[(80640, 1), (4480, 1), (672, 5), (16, 7)]),
        (9, &[(725760, 1), (40320, 1), (6048, 5), (144, 7), (2, 9)]),
        (
            10,
            &[(7257600, 1), (403200, 1), (12096, 1), (1440, 7), (20, 9)],
        ),
    ];

    #[test]
    fn table1_regression() {
        for (k, data) in TABLE1_DATA {
            let p = ak_polynomial(k).unwrap();
            assert_eq!(p.coeffs().len(), data.len(), "k = {k}");
            for (c, &(n, d)) in p.coeffs().iter().zip(data) {
                assert_eq!(*c, rat(n, d), "k = {k}");
            }
        }
    }

    #[test]
    fn table1_rendering() {
        let rows = table1();
        assert_eq!(rows[1].to_string(), "4ρ");
        assert_eq!(rows[5].to_string(), "1440ρ + 80ρ³ + 12ρ⁵/5");
        assert_eq!(
            rows[9].to_string(),
            "7257600ρ + 403200ρ³ + 12096ρ⁵ + 1440ρ⁷/7 + 20ρ⁹/9"
        );
        assert_eq!(rows[0].to_string(), "2ρ");
    }

    #[test]
    fn ak_eval_values() {
        let e = std::f64::consts::E;
        assert!((ak_eval(1, e).unwrap() - 2.0).abs() < 1e-14);
        assert!((ak_eval(3, e).unwrap() - 38.0 / 3.0).abs() < 1e-12);
        assert!(ak_eval(5, 1.0 + 1e-12).unwrap() < 1e-9);
        assert!(ak_polynomial(0).is_err());
    }

    #[test]
    fn ak_is_odd_in_rho() {
        for k in 1..=12u32 {
            let p = ak_polynomial(k).unwrap().to_rho_poly();
            assert!(p.terms().all(|(e, _)| e % 2 == 1), "k = {k}");
        }
    }

    #[test]
    fn series_leading_term() {
        let x = 10f64.exp();
        let v = series_eval(x, std::f64::consts::E, 2).unwrap();
        assert!((v - 2.0 * x / 100.0).abs() < 1e-10);
        assert!(series_eval(1.0, 2.0, 4).is_err());
        assert!(series_eval(100.0, 2.0, 1).is_err());
    }

    #[test]
    fn series_telescopes() {
        let (x, r) = (1e6, 2.0);
        for n in 3..=8u32 {
            let diff = series_eval(x, r, n).unwrap() - series_eval(x, r, n - 1).unwrap();
            let term = ak_eval(n - 1, r).unwrap() * x / x.ln().powi(n as i32);
            assert!((diff - term).abs() <= 1e-12 * term.abs(), "n = {n}");
        }
    }

    #[test]
    fn transport_reduces_to_li_coefficients() {
        // b = (1, 0, 0, ...) gives c_k = (k-1)!
        let b = BSequence::from_rationals(vec![rat(1, 1)]).unwrap();
        let c = nb_coefficients(&b, 7).unwrap();
        let mut fact = BigInt::one();
        for (k, ck) in c.iter().enumerate() {
            if k > 0 {
                fact *= k as u64;
            }
            assert_eq!(
                *ck,
                RhoPoly::constant(BigRational::from_integer(fact.clone()))
            );
        }
    }

    #[test]
    fn transport_shifted_unit() {
        // b = (0, 1, 0, ...) gives (0, 1, 2, 6, 24, ...)
        let b = BSequence::from_rationals(vec![rat(0, 1), rat(1, 1)]).unwrap();
        let c = nb_coefficients(&b, 6).unwrap();
        let expected = [0i64, 1, 2, 6, 24];
        for (ck, &e) in c.iter().zip(&expected) {
            if e == 0 {
                assert!(ck.is_zero());
            } else {
                assert_eq!(*ck, RhoPoly::constant(rat(e, 1)));
            }
        }
    }

    #[test]
    fn transport_reproduces_ak() {
        // the even-index choice makes c_{k+1} equal a_k, symbolically
        let b = BSequence::even_index_log_powers(12);
        let c = nb_coefficients(&b, 12).unwrap();
        for k in 1..=10u32 {
            let ak = ak_polynomial(k).unwrap().to_rho_poly();
            assert_eq!(c[k as usize], ak, "k = {k}");
        }
    }

    #[test]
    fn b_sequence_rejects_negative() {
        assert!(BSequence::from_rationals(vec![rat(-1, 2)]).is_err());
        assert!(BSequence::from_polys(vec![RhoPoly::term(2, rat(-3, 1))]).is_err());
    }

    #[test]
    fn mu_values() {
        assert_eq!(mu(1).unwrap(), 1);
        assert_eq!(mu(2).unwrap(), 6);
        assert_eq!(mu(3).unwrap(), 10);
        assert_eq!(mu(5).unwrap(), 15);
    }

    #[test]
    fn mu_formula_values() {
        assert_eq!(mu_formula(1).unwrap(), Some(1));
        assert_eq!(mu_formula(2).unwrap(), Some(6));
        assert_eq!(mu_formula(3).unwrap(), Some(10));
        assert_eq!(mu_formula(5).unwrap(), Some(15));
        // 2j-1 = 81 = 3^4 with 4 > 3: hypothesis fails
        assert_eq!(mu_formula(41).unwrap(), None);
    }

    #[test]
    fn mu_bound_and_prime_equality() {
        for j in 1..=30u32 {
            let m = mu(j).unwrap();
            let d = 2 * j as u64 - 1;
            assert!(m <= 4 * j as u64 - 2, "j = {j}");
            let d_prime = d > 1
                && (2..d)
                    .take_while(|q| q * q <= d)
                    .all(|q| !d.is_multiple_of(q));
            assert_eq!(m == 4 * j as u64 - 2, d_prime, "j = {j}");
        }
    }

    #[test]
    fn integrality_criterion_small() {
        for j in 1..=12u32 {
            let m = mu(j).unwrap();
            for k in (2 * j - 1)..(m as u32 + 6) {
                let c = ak_coefficient(k, j);
                let integral = c.denom().is_one();
                assert_eq!(integral, k as u64 >= m, "k = {k}, j = {j}");
            }
        }
    }

    #[test]
    fn mu_formula_agrees_where_applicable() {
        for j in 1..=30u32 {
            if let Some(v) = mu_formula(j).unwrap() {
                assert_eq!(v, mu(j).unwrap(), "j = {j}");
            }
        }
    }
}
