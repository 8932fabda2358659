//! Exact evaluation of the Cantor function `c : [0, 1] → [0, 1]`.
//!
//! With `x = Σ x_n 3^-n` (canonical expansion, no tail of 2s) and
//! `m(x) = min{n : x_n = 1}`,
//!
//! ```text
//! c(x) = Σ_{n < m(x)} (x_n / 2) 2^-n + 2^-m(x)
//! ```
//!
//! Ternary expansions of rationals are eventually periodic; they are found
//! by long division with remainder tracking, so `c` is exact on every
//! rational whose preperiod and period fit in the requested depth. The
//! right endpoint `1` has no expansion without a 2-tail and is carried by
//! [`UnitPoint::One`], whose digit string is the all-2 expansion.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::mod1::{CirclePoint, Mod1Rational};
use crate::{Error, Result};

/// Digit budget used when an exact value is wanted.
pub const EXACT_DEPTH: usize = 4096;

/// A rational point of the closed interval `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnitPoint {
    Circle(Mod1Rational),
    One,
}

impl UnitPoint {
    pub fn from_ratio(r: &BigRational) -> Result<Self> {
        if r < &BigRational::zero() || r > &BigRational::one() {
            return Err(Error::OutOfDomain(r.to_string()));
        }
        if r.is_one() {
            Ok(UnitPoint::One)
        } else {
            Ok(UnitPoint::Circle(Mod1Rational::from_ratio(r)?))
        }
    }

    pub fn to_ratio(&self) -> BigRational {
        match self {
            UnitPoint::Circle(x) => x.to_ratio(),
            UnitPoint::One => BigRational::one(),
        }
    }
}

impl From<Mod1Rational> for UnitPoint {
    fn from(x: Mod1Rational) -> Self {
        UnitPoint::Circle(x)
    }
}

impl fmt::Display for UnitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitPoint::Circle(x) => x.fmt(f),
            UnitPoint::One => f.write_str("1"),
        }
    }
}

/// Base-3 expansion `0.(preperiod)(period)(period)...`.
///
/// `period == Some(vec![])` marks a terminating expansion; `None` means the
/// expansion did not repeat within the depth it was computed to, and
/// `preperiod` then holds the leading digits only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TernaryDigits {
    pub preperiod: Vec<u8>,
    pub period: Option<Vec<u8>>,
}

impl TernaryDigits {
    /// The `n`-th digit (1-based), if known.
    pub fn digit(&self, n: usize) -> Option<u8> {
        assert!(n >= 1, "digits are 1-based");
        if let Some(&d) = self.preperiod.get(n - 1) {
            return Some(d);
        }
        match &self.period {
            Some(p) if p.is_empty() => Some(0),
            Some(p) => Some(p[(n - 1 - self.preperiod.len()) % p.len()]),
            None => None,
        }
    }
}

/// Expansion of `x` in base 3, computing at most `depth` digits.
pub fn ternary_digits(x: &UnitPoint, depth: usize) -> TernaryDigits {
    let x = match x {
        UnitPoint::One => {
            return TernaryDigits {
                preperiod: vec![],
                period: Some(vec![2]),
            }
        }
        UnitPoint::Circle(x) => x,
    };
    let den = x.den();
    let mut rem = x.num().clone();
    let mut digits = Vec::new();
    let mut seen: HashMap<BigUint, usize> = HashMap::new();
    loop {
        if rem.is_zero() {
            return TernaryDigits {
                preperiod: digits,
                period: Some(vec![]),
            };
        }
        if let Some(&start) = seen.get(&rem) {
            let period = digits.split_off(start);
            return TernaryDigits {
                preperiod: digits,
                period: Some(period),
            };
        }
        if digits.len() >= depth {
            return TernaryDigits {
                preperiod: digits,
                period: None,
            };
        }
        seen.insert(rem.clone(), digits.len());
        let t = rem * 3u32;
        digits.push((&t / den).to_u8().expect("ternary digit"));
        rem = t % den;
    }
}

/// `m(x)`, the position of the first digit 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FirstOne {
    At(usize),
    /// No digit equals 1 (`m(x) = ∞`).
    Never,
    /// None among the first `n` digits; the rest is unknown.
    Beyond(usize),
}

pub fn first_one_index(d: &TernaryDigits) -> FirstOne {
    if let Some(i) = d.preperiod.iter().position(|&v| v == 1) {
        return FirstOne::At(i + 1);
    }
    match &d.period {
        Some(p) => match p.iter().position(|&v| v == 1) {
            Some(i) => FirstOne::At(d.preperiod.len() + i + 1),
            None => FirstOne::Never,
        },
        None => FirstOne::Beyond(d.preperiod.len()),
    }
}

/// Value of `c`: exact, or bracketed when the expansion was not resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CantorValue {
    Exact(BigRational),
    Interval { lo: BigRational, hi: BigRational },
}

impl CantorValue {
    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            CantorValue::Exact(v) => Some(v),
            CantorValue::Interval { .. } => None,
        }
    }

    pub fn lo(&self) -> &BigRational {
        match self {
            CantorValue::Exact(v) => v,
            CantorValue::Interval { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> &BigRational {
        match self {
            CantorValue::Exact(v) => v,
            CantorValue::Interval { hi, .. } => hi,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let mid = (self.lo() + self.hi()) / BigRational::from_integer(BigInt::from(2));
        mid.to_f64().unwrap_or(f64::NAN)
    }

    fn map(&self, f: impl Fn(&BigRational) -> BigRational) -> CantorValue {
        match self {
            CantorValue::Exact(v) => CantorValue::Exact(f(v)),
            CantorValue::Interval { lo, hi } => CantorValue::Interval {
                lo: f(lo),
                hi: f(hi),
            },
        }
    }

    /// Equal when both are exact; overlapping otherwise.
    fn agrees_with(&self, other: &CantorValue) -> bool {
        match (self, other) {
            (CantorValue::Exact(a), CantorValue::Exact(b)) => a == b,
            _ => self.lo() <= other.hi() && other.lo() <= self.hi(),
        }
    }
}

fn pow2_inv(n: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << n)
}

/// `Σ (digit_i / 2) 2^-(offset + i)` over `digits`, i from 1.
fn binary_sum(digits: &[u8], offset: usize) -> BigRational {
    let mut acc = BigInt::zero();
    for &d in digits {
        acc = (acc << 1u32) + BigInt::from(d / 2);
    }
    BigRational::new(acc, BigInt::one() << (offset + digits.len()))
}

/// `c(x)` from at most `depth` ternary digits.
pub fn cantor_eval(x: &UnitPoint, depth: usize) -> CantorValue {
    let d = ternary_digits(x, depth);
    match first_one_index(&d) {
        FirstOne::At(m) => {
            let head: Vec<u8> = (1..m).map(|n| d.digit(n).expect("resolved")).collect();
            CantorValue::Exact(binary_sum(&head, 0) + pow2_inv(m))
        }
        FirstOne::Never => {
            let head = binary_sum(&d.preperiod, 0);
            let period = d.period.as_deref().unwrap_or(&[]);
            if period.is_empty() {
                return CantorValue::Exact(head);
            }
            // Geometric series over the repeating block.
            let block = binary_sum(period, 0);
            let ratio = BigRational::one() - pow2_inv(period.len());
            let tail = block / ratio * pow2_inv(d.preperiod.len());
            CantorValue::Exact(head + tail)
        }
        FirstOne::Beyond(n) => {
            let lo = binary_sum(&d.preperiod, 0);
            let hi = &lo + pow2_inv(n);
            CantorValue::Interval { lo, hi }
        }
    }
}

/// `c(x)` for an arbitrary rational in `[0, 1]`.
pub fn cantor_ratio(x: &BigRational, depth: usize) -> Result<CantorValue> {
    Ok(cantor_eval(&UnitPoint::from_ratio(x)?, depth))
}

/// `c(num/den)` in floating point; `num ≥ den` gives 1.
pub fn cantor_ratio_f64(num: u64, den: u64) -> f64 {
    assert!(den > 0, "zero denominator");
    if num >= den {
        return 1.0;
    }
    let den = u128::from(den);
    let mut rem = u128::from(num);
    let mut value = 0.0;
    let mut weight = 0.5;
    for _ in 0..64 {
        if rem == 0 {
            break;
        }
        let t = rem * 3;
        let digit = t / den;
        rem = t % den;
        match digit {
            1 => return value + weight,
            2 => value += weight,
            _ => {}
        }
        weight *= 0.5;
    }
    value
}

/// `c(x)` for a floating-point `x`, using its exact binary value.
pub fn cantor_f64(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let r = BigRational::from_float(x).expect("finite");
    let den = r.denom();
    match (r.numer().to_u64(), den.to_u64()) {
        (Some(n), Some(d)) if d.leading_zeros() >= 2 => cantor_ratio_f64(n, d),
        _ => cantor_ratio(&r, 64).map(|v| v.to_f64()).unwrap_or(f64::NAN),
    }
}

/// Checks `c(x/3) = c(x)/2`, `c((x+1)/3) = 1/2` and
/// `c((x+2)/3) = 1/2 + c(x)/2`.
pub fn self_similarity_check(x: &UnitPoint, depth: usize) -> Result<[bool; 3]> {
    let three = BigRational::from_integer(BigInt::from(3));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let xr = x.to_ratio();
    let cx = cantor_eval(x, depth);
    let at = |shift: i64| -> Result<CantorValue> {
        let y = (&xr + BigRational::from_integer(BigInt::from(shift))) / &three;
        cantor_ratio(&y, depth)
    };
    let first = at(0)?.agrees_with(&cx.map(|v| v * &half));
    let second = at(1)?.agrees_with(&CantorValue::Exact(half.clone()));
    let third = at(2)?.agrees_with(&cx.map(|v| &half + v * &half));
    Ok([first, second, third])
}

/// Points showing that `c` is not Lipschitz near 1.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzWitness {
    pub x: UnitPoint,
    pub y: Mod1Rational,
    /// `|c(x) - c(y)| / |x - y|`; equals `(1/2)(3/2)^N`.
    pub quotient: BigRational,
}

/// `x = 1` against `y = 0.22…21₃` (`N-1` twos then a 1).
pub fn lipschitz_witness(n: u32) -> Result<LipschitzWitness> {
    if n == 0 {
        return Err(Error::OutOfDomain("N = 0".into()));
    }
    let mut num = BigInt::zero();
    for _ in 1..n {
        num = num * 3 + 2;
    }
    num = num * 3 + 1;
    let den = num_traits::pow(BigInt::from(3), n as usize);
    let y = Mod1Rational::new(num, den)?;
    let x = UnitPoint::One;
    let yp = UnitPoint::Circle(y.clone());
    let cx = cantor_eval(&x, EXACT_DEPTH);
    let cy = cantor_eval(&yp, EXACT_DEPTH);
    let (cx, cy) = match (cx.exact(), cy.exact()) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => unreachable!("both expansions terminate or repeat immediately"),
    };
    let dist = x.to_ratio() - y.to_ratio();
    let quotient = (cx - cy).abs() / dist.abs();
    Ok(LipschitzWitness { x, y, quotient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn up(n: i64, d: i64) -> UnitPoint {
        UnitPoint::from_ratio(&q(n, d)).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn c(n: i64, d: i64) -> BigRational {
        cantor_eval(&up(n, d), EXACT_DEPTH).exact().unwrap().clone()
    }

    #[test]
    fn digit_examples() {
        let third = ternary_digits(&up(1, 3), 64);
        assert_eq!(third.preperiod, vec![1]);
        assert_eq!(third.period, Some(vec![]));
        let quarter = ternary_digits(&up(1, 4), 64);
        assert!(quarter.preperiod.is_empty());
        assert_eq!(quarter.period, Some(vec![0, 2]));
        let half = ternary_digits(&up(1, 2), 64);
        assert!(half.preperiod.is_empty());
        assert_eq!(half.period, Some(vec![1]));
        let unresolved = ternary_digits(&up(1, 1 << 20), 8);
        assert_eq!(unresolved.preperiod.len(), 8);
        assert_eq!(unresolved.period, None);
    }

    #[test]
    fn digits_match_long_division_oracle() {
        // Independent oracle: float-free digit extraction by repeated x*3.
        for (n, d) in [(5, 12), (7, 9), (1, 10), (13, 27), (2, 7)] {
            let digits = ternary_digits(&up(n, d), 200);
            let mut x = q(n, d);
            for k in 1..=30 {
                x *= BigRational::from_integer(3.into());
                let dig = x.floor();
                x -= &dig;
                assert_eq!(
                    digits.digit(k),
                    dig.to_integer().to_u8(),
                    "{n}/{d} digit {k}"
                );
            }
        }
    }

    #[test]
    fn first_one_examples() {
        assert_eq!(
            first_one_index(&ternary_digits(&up(1, 2), 64)),
            FirstOne::At(1)
        );
        assert_eq!(
            first_one_index(&ternary_digits(&up(1, 4), 64)),
            FirstOne::Never
        );
        assert_eq!(
            first_one_index(&ternary_digits(&up(0, 1), 64)),
            FirstOne::Never
        );
    }

    #[test]
    fn eval_examples() {
        assert_eq!(c(1, 3), q(1, 2));
        assert_eq!(c(2, 3), q(1, 2));
        assert_eq!(c(1, 4), q(1, 3));
        assert_eq!(c(0, 1), q(0, 1));
        assert_eq!(cantor_eval(&UnitPoint::One, 8).exact(), Some(&q(1, 1)));
        assert_eq!(c(1, 6), q(1, 4));
    }

    #[test]
    fn interval_brackets_value() {
        let x = up(1, 1 << 20);
        let v = cantor_eval(&x, 10);
        assert!(v.exact().is_none());
        assert_eq!(v.hi() - v.lo(), q(1, 1024));
        let exact = c(1, 1 << 20);
        assert!(v.lo() <= &exact && &exact <= v.hi());
    }

    #[test]
    fn self_similarity_examples() {
        assert_eq!(
            self_similarity_check(&up(1, 4), EXACT_DEPTH).unwrap(),
            [true; 3]
        );
        assert_eq!(c(1, 12), q(1, 6));
        assert_eq!(c(5, 12), q(1, 2));
        assert_eq!(c(3, 4), q(2, 3));
        assert_eq!(
            self_similarity_check(&up(0, 1), EXACT_DEPTH).unwrap(),
            [true; 3]
        );
        assert_eq!(
            self_similarity_check(&UnitPoint::One, EXACT_DEPTH).unwrap(),
            [true; 3]
        );
        for (n, d) in [(3, 11), (17, 19), (1, 81), (40, 41)] {
            assert_eq!(
                self_similarity_check(&up(n, d), EXACT_DEPTH).unwrap(),
                [true; 3]
            );
        }
    }

    #[test]
    fn lipschitz_witness_examples() {
        let w1 = lipschitz_witness(1).unwrap();
        assert_eq!(w1.y, Mod1Rational::new(1, 3).unwrap());
        assert_eq!(w1.quotient, q(3, 4));
        let w2 = lipschitz_witness(2).unwrap();
        assert_eq!(w2.y, Mod1Rational::new(7, 9).unwrap());
        assert_eq!(c(7, 9), q(3, 4));
        assert_eq!(w2.quotient, q(9, 8));
        for n in 1..=30u32 {
            let want = BigRational::new(
                num_traits::pow(BigInt::from(3), n as usize),
                BigInt::one() << (n + 1),
            );
            assert_eq!(lipschitz_witness(n).unwrap().quotient, want);
        }
    }

    #[test]
    fn fast_paths_agree_with_exact() {
        for d in 1..60i64 {
            for n in 0..=d {
                let exact = c(n, d).to_f64().unwrap();
                assert!((cantor_ratio_f64(n as u64, d as u64) - exact).abs() < 1e-15);
                let xf = n as f64 / d as f64;
                // c is Hölder with exponent log 2 / log 3; rounding of xf is ~1e-16.
                assert!((cantor_f64(xf) - exact).abs() < 1e-9, "{n}/{d}");
            }
        }
    }

    #[test]
    fn monotone_on_random_pairs() {
        let mut s = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        };
        for _ in 0..10_000 {
            let d1 = 1 + next() % 5000;
            let d2 = 1 + next() % 5000;
            let a = q((next() % (d1 + 1)) as i64, d1 as i64);
            let b = q((next() % (d2 + 1)) as i64, d2 as i64);
            let (x, y) = if a <= b { (a, b) } else { (b, a) };
            let cx = cantor_ratio(&x, 64).unwrap();
            let cy = cantor_ratio(&y, 64).unwrap();
            assert!(cx.lo() <= cy.hi(), "c({x}) > c({y})");
        }
    }

    #[test]
    fn hits_every_dyadic() {
        for e in 0..=10u32 {
            for t in 0..=(1u64 << e) {
                // Binary digits of t/2^e doubled into ternary digits.
                let target = q(t as i64, 1 << e);
                let x = if t == 1 << e {
                    BigRational::one()
                } else {
                    let mut num = BigInt::zero();
                    for bit in (0..e).rev() {
                        num = num * 3 + 2 * ((t >> bit) & 1);
                    }
                    BigRational::new(num, num_traits::pow(BigInt::from(3), e as usize))
                };
                assert_eq!(
                    cantor_ratio(&x, EXACT_DEPTH).unwrap().exact(),
                    Some(&target)
                );
            }
        }
    }

    #[test]
    fn not_injective() {
        assert_eq!(c(1, 3), c(2, 3));
        assert!((c(1, 3) - q(1, 2)).abs().is_zero());
    }

    #[test]
    fn integral_identity_node_sum() {
        // (c(0) + c(1/3) + c(2/3)) / (3 - 1)
        assert_eq!((c(0, 1) + c(1, 3) + c(2, 3)) / q(2, 1), q(1, 2));
    }
}
