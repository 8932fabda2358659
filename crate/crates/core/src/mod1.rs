//! Points of the circle `T` identified with `[0, 1)`, and their orbits under
//! `x ↦ p^i q^j x mod 1`.
//!
//! Two carriers are provided. [`Mod1Rational`] is an exact reduced fraction.
//! [`Mod1Fixed`] is a `P`-bit binary fraction together with an error bound
//! (in units of `2^-P`) on how far it may sit from the real number it
//! stands for. Both implement [`CirclePoint`], which is what the orbit and
//! summation code is generic over.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Bits of accuracy promised on every point produced by a budgeted scaling.
pub const OUTPUT_BITS: u32 = 53;

/// Headroom kept above [`OUTPUT_BITS`] in fixed-point budgets.
pub const GUARD_BITS: u32 = 8;

/// Bound on the relative error of `e(kx)` for an exactly known `x`.
pub const PHASE_EPS: f64 = 8.881_784_197_001_252e-16; // 2^-50

/// Behaviour shared by exact and fixed-point circle points.
pub trait CirclePoint: Clone + fmt::Debug + fmt::Display + Send + Sync {
    /// `factor · self mod 1`, computed exactly on the representation.
    ///
    /// No accuracy check is made; see [`CirclePoint::ensure_budget`].
    fn mul_mod1(&self, factor: &BigUint) -> Self;

    /// Fails with [`Error::PrecisionExhausted`] when multiplying by `factor`
    /// would leave fewer than [`OUTPUT_BITS`] meaningful bits.
    fn ensure_budget(&self, factor: &BigUint) -> Result<()>;

    /// `e(k x) = exp(2πi k x)`.
    fn phase(&self, k: i64) -> Complex64;

    /// Absolute error bound for [`CirclePoint::phase`].
    fn phase_error(&self, k: i64) -> f64;

    /// The exact value carried by the representation.
    fn to_ratio(&self) -> BigRational;

    fn to_f64(&self) -> f64;

    /// `p^i q^j x mod 1`.
    fn scale_pow(&self, p: u64, i: u32, q: u64, j: u32) -> Result<Self> {
        let factor = pow_product(p, i, q, j);
        self.ensure_budget(&factor)?;
        Ok(self.mul_mod1(&factor))
    }
}

/// `p^i q^j x mod 1`; free-function form of [`CirclePoint::scale_pow`].
pub fn scale_pow<P: CirclePoint>(x: &P, p: u64, i: u32, q: u64, j: u32) -> Result<P> {
    x.scale_pow(p, i, q, j)
}

/// `p^i · q^j` as a big integer.
pub fn pow_product(p: u64, i: u32, q: u64, j: u32) -> BigUint {
    num_traits::pow(BigUint::from(p), i as usize) * num_traits::pow(BigUint::from(q), j as usize)
}

/// Smallest `e` with `2^e ≥ n` (so `0` for `n ≤ 1`).
fn ceil_log2(n: &BigUint) -> u64 {
    if n <= &BigUint::one() {
        0
    } else {
        (n - 1u32).bits()
    }
}

/// Bits a [`Mod1Fixed`] needs so that `p^i q^j x` keeps `output_bits`
/// accurate bits: `⌈i log2 p + j log2 q⌉ + output_bits + GUARD_BITS`.
pub fn required_bits(p: u64, i: u32, q: u64, j: u32, output_bits: u32) -> u64 {
    ceil_log2(&pow_product(p, i, q, j)) + u64::from(output_bits) + u64::from(GUARD_BITS)
}

/// `e(quarter/4 + frac/4)`; quarter turns are applied exactly.
fn quarter_turn(quarter: u8, frac: f64) -> Complex64 {
    let (s, c) = (frac * std::f64::consts::FRAC_PI_2).sin_cos();
    match quarter & 3 {
        0 => Complex64::new(c, s),
        1 => Complex64::new(-s, c),
        2 => Complex64::new(-c, -s),
        _ => Complex64::new(s, -c),
    }
}

/// `e(num/den)` for machine-sized fractions.
///
/// Multiples of a quarter turn come out exact (`e(1/2) = -1`, `e(1/4) = i`).
pub fn turn(num: u64, den: u64) -> Complex64 {
    assert!(den > 0, "zero denominator");
    let four = u128::from(num % den) * 4;
    let den = u128::from(den);
    let quarter = (four / den) as u8;
    let rem = four % den;
    quarter_turn(quarter, rem as f64 / den as f64)
}

fn turn_big(num: &BigUint, den: &BigUint) -> Complex64 {
    let four = (num % den) << 2u32;
    let (quarter, rem) = four.div_rem(den);
    let frac = match (rem.to_u64(), den.to_u64()) {
        (Some(r), Some(d)) => r as f64 / d as f64,
        _ => BigRational::new(BigInt::from(rem), BigInt::from(den.clone()))
            .to_f64()
            .unwrap_or(0.0),
    };
    quarter_turn(quarter.to_u8().unwrap_or(0), frac)
}

/// `m · 2^-shift` as the nearest-ish `f64` (truncated to 64 leading bits).
fn dyadic_to_f64(m: &BigUint, shift: u32) -> f64 {
    let bits = m.bits();
    if bits > 64 {
        let drop = bits - 64;
        let top = (m >> drop).to_u64().unwrap_or(u64::MAX);
        top as f64 * 2f64.powi(drop as i32 - shift as i32)
    } else {
        m.to_u64().unwrap_or(0) as f64 * 2f64.powi(-(shift as i32))
    }
}

/// An exact rational point `num/den` of `[0, 1)` in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mod1Rational {
    num: BigUint,
    den: BigUint,
}

/// Reduced representative of `(num mod den)/den`.
pub fn make_mod1(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Mod1Rational> {
    Mod1Rational::new(num, den)
}

impl Mod1Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let (mut num, mut den) = (num.into(), den.into());
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if den.sign() == Sign::Minus {
            num = -num;
            den = -den;
        }
        let num = num.mod_floor(&den);
        Ok(Self::reduced(
            num.to_biguint().expect("mod_floor is nonnegative"),
            den.to_biguint().expect("positive"),
        ))
    }

    fn reduced(num: BigUint, den: BigUint) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        Self {
            num: num / &g,
            den: den / g,
        }
    }

    pub fn zero() -> Self {
        Self {
            num: BigUint::zero(),
            den: BigUint::one(),
        }
    }

    /// The fractional part of `r`.
    pub fn from_ratio(r: &BigRational) -> Result<Self> {
        Self::new(r.numer().clone(), r.denom().clone())
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn den(&self) -> &BigUint {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl PartialOrd for Mod1Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mod1Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl fmt::Display for Mod1Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Mod1Rational {
    type Err = Error;

    /// Accepts `a/b` or a bare integer (which is `0` mod 1).
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("not an integer: {t:?}")))
        };
        match s.split_once('/') {
            Some((n, d)) => Self::new(parse(n)?, parse(d)?),
            None => Self::new(parse(s)?, 1),
        }
    }
}

impl CirclePoint for Mod1Rational {
    fn mul_mod1(&self, factor: &BigUint) -> Self {
        let f = factor % &self.den;
        Self::reduced((&self.num * f) % &self.den, self.den.clone())
    }

    fn ensure_budget(&self, _factor: &BigUint) -> Result<()> {
        Ok(())
    }

    fn phase(&self, k: i64) -> Complex64 {
        let kn = BigInt::from(k) * BigInt::from(self.num.clone());
        let den = BigInt::from(self.den.clone());
        let t = kn.mod_floor(&den).to_biguint().expect("nonnegative");
        turn_big(&t, &self.den)
    }

    fn phase_error(&self, _k: i64) -> f64 {
        PHASE_EPS
    }

    fn to_ratio(&self) -> BigRational {
        BigRational::new_raw(
            BigInt::from(self.num.clone()),
            BigInt::from(self.den.clone()),
        )
    }

    fn to_f64(&self) -> f64 {
        self.to_ratio().to_f64().unwrap_or(0.0)
    }

    fn scale_pow(&self, p: u64, i: u32, q: u64, j: u32) -> Result<Self> {
        let den = &self.den;
        let f = BigUint::from(p).modpow(&BigUint::from(i), den)
            * BigUint::from(q).modpow(&BigUint::from(j), den);
        Ok(self.mul_mod1(&f))
    }
}

/// A `P`-bit binary fraction `mantissa · 2^-P ∈ [0, 1)` with an error bound.
///
/// `err` (in units of `2^-P`) bounds the distance, along the circle, between
/// the stored value and the real number it approximates. A value with
/// `err = 0` is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mod1Fixed {
    mantissa: BigUint,
    precision: u32,
    err: BigUint,
}

impl Mod1Fixed {
    pub fn new(mantissa: BigUint, precision: u32, err: BigUint) -> Result<Self> {
        if precision == 0 || mantissa.bits() > u64::from(precision) {
            return Err(Error::MantissaOverflow(precision));
        }
        Ok(Self {
            mantissa,
            precision,
            err,
        })
    }

    pub fn exact(mantissa: BigUint, precision: u32) -> Result<Self> {
        Self::new(mantissa, precision, BigUint::zero())
    }

    /// Nearest `precision`-bit point to the fractional part of `r`.
    pub fn from_ratio(r: &BigRational, precision: u32) -> Result<Self> {
        Ok(Self::from_rational(
            &Mod1Rational::from_ratio(r)?,
            precision,
        ))
    }

    pub fn from_rational(x: &Mod1Rational, precision: u32) -> Self {
        let precision = precision.max(1);
        let scaled = &x.num << precision;
        let (mut m, rem) = scaled.div_rem(&x.den);
        if &rem << 1u32 >= x.den {
            m += 1u32;
        }
        let modulus = BigUint::one() << precision;
        if m >= modulus {
            m -= modulus;
        }
        let err = if rem.is_zero() {
            BigUint::zero()
        } else {
            BigUint::one()
        };
        Self {
            mantissa: m,
            precision,
            err,
        }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Error bound in units of `2^-precision`.
    pub fn err(&self) -> &BigUint {
        &self.err
    }

    /// Drops to `precision` bits by truncation, widening the error bound.
    pub fn truncate(&self, precision: u32) -> Self {
        if precision >= self.precision {
            return self.clone();
        }
        let drop = self.precision - precision;
        let low_mask = (BigUint::one() << drop) - 1u32;
        let dropped = !(&self.mantissa & &low_mask).is_zero();
        let mut err = (&self.err + &low_mask) >> drop;
        if dropped {
            err += 1u32;
        }
        Self {
            mantissa: &self.mantissa >> drop,
            precision,
            err,
        }
    }
}

impl fmt::Display for Mod1Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:x}@{}", self.mantissa, self.precision)
    }
}

impl FromStr for Mod1Fixed {
    type Err = Error;

    /// Parses the exact wire form `0x<hex mantissa>@<bits>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected 0x<hex>@<bits>, got {s:?}"));
        let body = s.trim().strip_prefix("0x").ok_or_else(bad)?;
        let (hex, bits) = body.split_once('@').ok_or_else(bad)?;
        let mantissa = BigUint::parse_bytes(hex.as_bytes(), 16).ok_or_else(bad)?;
        let bits: u32 = bits.parse().map_err(|_| bad())?;
        Self::exact(mantissa, bits)
    }
}

impl CirclePoint for Mod1Fixed {
    fn mul_mod1(&self, factor: &BigUint) -> Self {
        let mask = (BigUint::one() << self.precision) - 1u32;
        Self {
            mantissa: (&self.mantissa * factor) & mask,
            precision: self.precision,
            err: &self.err * factor,
        }
    }

    fn ensure_budget(&self, factor: &BigUint) -> Result<()> {
        if self.err.is_zero() {
            return Ok(());
        }
        // The scaled error must stay below 2^(P - OUTPUT_BITS - GUARD_BITS).
        let required =
            ceil_log2(&(factor * &self.err)) + u64::from(OUTPUT_BITS) + u64::from(GUARD_BITS);
        if required > u64::from(self.precision) {
            return Err(Error::PrecisionExhausted {
                required,
                available: self.precision,
            });
        }
        Ok(())
    }

    fn phase(&self, k: i64) -> Complex64 {
        let p = self.precision;
        let modulus = BigUint::one() << p;
        let mut t = (&self.mantissa * BigUint::from(k.unsigned_abs())) % &modulus;
        if k < 0 && !t.is_zero() {
            t = &modulus - t;
        }
        let four = t << 2u32;
        let quarter = (&four >> p).to_u8().unwrap_or(0);
        let rem = four & (&modulus - 1u32);
        quarter_turn(quarter, dyadic_to_f64(&rem, p))
    }

    fn phase_error(&self, k: i64) -> f64 {
        let spread = dyadic_to_f64(
            &(&self.err * BigUint::from(k.unsigned_abs())),
            self.precision,
        );
        PHASE_EPS + std::f64::consts::TAU * spread
    }

    fn to_ratio(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.mantissa.clone()),
            BigInt::one() << self.precision,
        )
    }

    fn to_f64(&self) -> f64 {
        dyadic_to_f64(&self.mantissa, self.precision)
    }
}

/// A uniformly random `bits`-bit point, exact (`err = 0`), deterministic in
/// `seed`.
pub fn random_point(bits: u32, seed: u64) -> Result<Mod1Fixed> {
    if bits < 64 {
        return Err(Error::TooFewBits(bits));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
    rng.fill_bytes(&mut bytes);
    let mask = (BigUint::one() << bits) - 1u32;
    Mod1Fixed::exact(BigUint::from_bytes_le(&bytes) & mask, bits)
}

/// Smallest `a` with `n = a^e` for some `e ≥ 1`.
pub fn perfect_power_base(n: u64) -> u64 {
    if n < 4 {
        return n;
    }
    for e in (2..=63u32).rev() {
        let r = n.nth_root(e);
        if r >= 2 && r.checked_pow(e) == Some(n) {
            // The largest such exponent leaves a root that is not itself a
            // perfect power.
            return r;
        }
    }
    n
}

/// Two multipliers `p, q ≥ 2` with `log p / log q` irrational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MultiplierPair {
    p: u64,
    q: u64,
}

impl MultiplierPair {
    /// Rejects pairs that are powers of a common integer, e.g. `(4, 2)`.
    pub fn new(p: u64, q: u64) -> Result<Self> {
        for m in [p, q] {
            if m < 2 {
                return Err(Error::MultiplierTooSmall(m));
            }
        }
        let root = perfect_power_base(p);
        if root == perfect_power_base(q) {
            return Err(Error::DependentPair { p, q, root });
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }
}

/// The double sequence `p^i q^j x mod 1` over the square `0 ≤ i, j < side`.
///
/// Enumeration is row-major (`i` outer, `j` inner). Each row is derived from
/// the base point directly, so rows can be produced independently and in
/// parallel.
#[derive(Clone, Debug)]
pub struct OrbitGrid<P> {
    base: P,
    pair: MultiplierPair,
    side: usize,
}

impl<P: CirclePoint> OrbitGrid<P> {
    pub fn new(base: P, pair: MultiplierPair, side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::EmptyGrid);
        }
        let last = (side - 1) as u32;
        base.ensure_budget(&pow_product(pair.p, last, pair.q, last))?;
        Ok(Self { base, pair, side })
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn pair(&self) -> MultiplierPair {
        self.pair
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of points, `side²`.
    pub fn len(&self) -> usize {
        self.side * self.side
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `p^i q^j x` for `j = 0..side`.
    pub fn row(&self, i: usize) -> Vec<P> {
        let start = self
            .base
            .mul_mod1(&num_traits::pow(BigUint::from(self.pair.p), i));
        let q = BigUint::from(self.pair.q);
        let mut row = Vec::with_capacity(self.side);
        row.push(start);
        for j in 1..self.side {
            let next = row[j - 1].mul_mod1(&q);
            row.push(next);
        }
        row
    }

    pub fn get(&self, i: usize, j: usize) -> P {
        self.base
            .mul_mod1(&pow_product(self.pair.p, i as u32, self.pair.q, j as u32))
    }

    /// Applies `f` to every row in parallel; results are in row order.
    pub fn map_rows<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &[P]) -> T + Sync + Send,
    {
        (0..self.side)
            .into_par_iter()
            .map(|i| f(i, &self.row(i)))
            .collect()
    }

    /// All `side²` points in row-major order.
    pub fn points(&self) -> Vec<P> {
        self.map_rows(|_, row| row.to_vec())
            .into_iter()
            .flatten()
            .collect()
    }
}
