use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::cantor::{self, EXACT_DEPTH};
use crate::{Error, Result};

/// Samples of a function on the uniform grid `t/K`, `t = 0..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::EmptyGrid);
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { samples })
    }

    /// Samples `t/K` of the identity, computed as `t as f64 / K as f64`.
    pub fn identity(k: usize) -> Self {
        Self {
            samples: (0..=k).map(|t| node(t, k)).collect(),
        }
    }

    pub fn sample(f: &Evaluable, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyGrid);
        }
        let samples = (0..=k)
            .map(|t| f.eval(&BigRational::new(BigInt::from(t), BigInt::from(k))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples)
    }

    /// `K`, the number of grid intervals.
    pub fn grid_size(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_monotone(&self) -> bool {
        self.samples.windows(2).all(|w| w[0] <= w[1])
    }

    /// `f(0) = 0` and `f(1) = 1` exactly.
    pub fn is_anchored(&self) -> bool {
        self.samples[0] == 0.0 && self.samples[self.grid_size()] == 1.0
    }

    /// Piecewise-linear interpolation; `x` is clamped to `[0, 1]`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let k = self.grid_size();
        let pos = x.clamp(0.0, 1.0) * k as f64;
        let i = (pos.floor() as usize).min(k - 1);
        let frac = pos - i as f64;
        if frac == 0.0 {
            return self.samples[i];
        }
        self.samples[i] + frac * (self.samples[i + 1] - self.samples[i])
    }

    /// Interpolant at `num/den`, with the grid position computed exactly.
    pub fn at_ratio(&self, num: u64, den: u64) -> f64 {
        let k = self.grid_size() as u128;
        let scaled = u128::from(num) * k;
        let den = u128::from(den);
        let i = (scaled / den) as usize;
        let rem = scaled % den;
        if rem == 0 || i >= self.grid_size() {
            return self.samples[i.min(self.grid_size())];
        }
        let frac = rem as f64 / den as f64;
        self.samples[i] + frac * (self.samples[i + 1] - self.samples[i])
    }

    /// Interpolant evaluated in exact rational arithmetic on the stored samples.
    pub fn interpolate_exact(&self, x: &BigRational) -> BigRational {
        let k = self.grid_size();
        let pos = x * BigRational::from_integer(BigInt::from(k));
        let i = pos.floor().to_integer().to_usize().unwrap_or(0).min(k);
        let frac = &pos - BigRational::from_integer(BigInt::from(i));
        let s = |t: usize| BigRational::from_float(self.samples[t]).expect("finite sample");
        if frac.is_zero() || i == k {
            return s(i);
        }
        s(i) + frac * (s(i + 1) - s(i))
    }

    /// `max_t |f_t - g_t|`; grids must match.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.samples.len(), other.samples.len(), "grid mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn node(t: usize, k: usize) -> f64 {
    t as f64 / k as f64
}

/// Right-continuous-from-the-left step function `x ↦ Σ_{a < x} w_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    positions: Vec<BigRational>,
    cumulative: Vec<BigRational>,
    positions_f64: Vec<f64>,
    cumulative_f64: Vec<f64>,
}

impl StepFunction {
    /// Atoms `(position, weight)`; positions are merged and sorted.
    pub fn new(mut atoms: Vec<(BigRational, BigRational)>) -> Self {
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut positions: Vec<BigRational> = Vec::new();
        let mut cumulative: Vec<BigRational> = Vec::new();
        let mut total = BigRational::zero();
        for (at, w) in atoms {
            total += w;
            if positions.last() == Some(&at) {
                *cumulative.last_mut().expect("nonempty") = total.clone();
            } else {
                positions.push(at);
                cumulative.push(total.clone());
            }
        }
        let positions_f64 = positions
            .iter()
            .map(|v| v.to_f64().unwrap_or(0.0))
            .collect();
        let cumulative_f64 = cumulative
            .iter()
            .map(|v| v.to_f64().unwrap_or(0.0))
            .collect();
        Self {
            positions,
            cumulative,
            positions_f64,
            cumulative_f64,
        }
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        let idx = self.positions.partition_point(|a| a < x);
        if idx == 0 {
            BigRational::zero()
        } else {
            self.cumulative[idx - 1].clone()
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let idx = self.positions_f64.partition_point(|&a| a < x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative_f64[idx - 1]
        }
    }

    pub fn eval_ratio(&self, num: u64, den: u64) -> f64 {
        let (n, d) = (BigInt::from(num), BigInt::from(den));
        let idx = self
            .positions
            .partition_point(|a| a.numer() * &d < &n * a.denom());
        if idx == 0 {
            0.0
        } else {
            self.cumulative_f64[idx - 1]
        }
    }
}

/// An element of `C[0, 1]` (or a step function) that can be evaluated
/// pointwise.
///
/// Identity, rational polynomials, the Cantor function, step functions and
/// grid interpolants (on their stored `f64` samples) evaluate exactly at
/// rational points; combinations and transfers do whenever their parts do.
#[derive(Clone, Debug, PartialEq)]
pub enum Evaluable {
    Identity,
    /// Coefficients `c_0, c_1, …` of `Σ c_i x^i`.
    Polynomial(Vec<BigRational>),
    Cantor,
    Interpolant(GridFunction),
    Step(StepFunction),
    /// `Σ α_i f_i`.
    Combination(Vec<(BigRational, Evaluable)>),
    /// `T_n` applied pointwise to `inner`.
    Transfer {
        n: u64,
        inner: Box<Evaluable>,
    },
}

fn check_domain(x: &BigRational) -> Result<()> {
    if x < &BigRational::zero() || x > &BigRational::one() {
        return Err(Error::OutOfDomain(x.to_string()));
    }
    Ok(())
}

impl Evaluable {
    pub fn constant(c: BigRational) -> Self {
        Evaluable::Polynomial(vec![c])
    }

    /// `x^d`.
    pub fn monomial(d: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); d + 1];
        coeffs[d] = BigRational::one();
        Evaluable::Polynomial(coeffs)
    }

    pub fn transfer(n: u64, inner: Evaluable) -> Self {
        Evaluable::Transfer {
            n,
            inner: Box::new(inner),
        }
    }

    /// Whether evaluation at rationals is exact for this kind.
    pub fn is_exact_at_rational(&self) -> bool {
        match self {
            Evaluable::Combination(terms) => terms.iter().all(|(_, f)| f.is_exact_at_rational()),
            Evaluable::Transfer { inner, .. } => inner.is_exact_at_rational(),
            _ => true,
        }
    }

    /// Exact value at `x`, or `None` when this point cannot be resolved
    /// exactly (a Cantor expansion longer than [`EXACT_DEPTH`]).
    pub fn eval_exact(&self, x: &BigRational) -> Result<Option<BigRational>> {
        check_domain(x)?;
        Ok(match self {
            Evaluable::Identity => Some(x.clone()),
            Evaluable::Polynomial(coeffs) => Some(
                coeffs
                    .iter()
                    .rev()
                    .fold(BigRational::zero(), |acc, c| acc * x + c),
            ),
            Evaluable::Cantor => cantor::cantor_ratio(x, EXACT_DEPTH)?.exact().cloned(),
            Evaluable::Interpolant(g) => Some(g.interpolate_exact(x)),
            Evaluable::Step(s) => Some(s.eval_exact(x)),
            Evaluable::Combination(terms) => {
                let mut acc = BigRational::zero();
                for (alpha, f) in terms {
                    match f.eval_exact(x)? {
                        Some(v) => acc += alpha * v,
                        None => return Ok(None),
                    }
                }
                Some(acc)
            }
            Evaluable::Transfer { n, inner } => {
                let n = *n;
                if n < 2 {
                    return Err(Error::OperatorIndex(n));
                }
                let nb = BigRational::from_integer(BigInt::from(n));
                let mut acc = BigRational::zero();
                for j in 0..n {
                    let jb = BigRational::from_integer(BigInt::from(j));
                    let (Some(a), Some(b)) = (
                        inner.eval_exact(&((x + &jb) / &nb))?,
                        inner.eval_exact(&(jb / &nb))?,
                    ) else {
                        return Ok(None);
                    };
                    acc += a - b;
                }
                Some(acc)
            }
        })
    }

    /// Value at `x`: exact where possible, rounded once to `f64`.
    pub fn eval(&self, x: &BigRational) -> Result<f64> {
        match self.eval_exact(x)? {
            Some(v) => Ok(v.to_f64().unwrap_or(f64::NAN)),
            None => self.eval_f64(x.to_f64().unwrap_or(f64::NAN)),
        }
    }

    /// Floating-point evaluation.
    pub fn eval_f64(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x.to_string()));
        }
        Ok(match self {
            Evaluable::Identity => x,
            Evaluable::Polynomial(coeffs) => coeffs
                .iter()
                .rev()
                .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN)),
            Evaluable::Cantor => cantor::cantor_f64(x),
            Evaluable::Interpolant(g) => g.interpolate(x),
            Evaluable::Step(s) => s.eval_f64(x),
            Evaluable::Combination(terms) => {
                let mut acc = 0.0;
                for (alpha, f) in terms {
                    acc += alpha.to_f64().unwrap_or(f64::NAN) * f.eval_f64(x)?;
                }
                acc
            }
            Evaluable::Transfer { n, inner } => {
                if *n < 2 {
                    return Err(Error::OperatorIndex(*n));
                }
                let nf = *n as f64;
                let mut acc = 0.0;
                for j in 0..*n {
                    let jf = j as f64;
                    acc += inner.eval_f64(((x + jf) / nf).min(1.0))? - inner.eval_f64(jf / nf)?;
                }
                acc
            }
        })
    }

    /// Fast floating-point evaluation at `num/den` (`num ≤ den`), keeping
    /// the argument exact where the kind allows.
    pub fn eval_ratio(&self, num: u64, den: u64) -> Result<f64> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        if num > den {
            return Err(Error::OutOfDomain(format!("{num}/{den}")));
        }
        Ok(match self {
            Evaluable::Identity => num as f64 / den as f64,
            Evaluable::Cantor => cantor::cantor_ratio_f64(num, den),
            Evaluable::Interpolant(g) => g.at_ratio(num, den),
            Evaluable::Step(s) => s.eval_ratio(num, den),
            Evaluable::Polynomial(_) => self.eval_f64(num as f64 / den as f64)?,
            Evaluable::Combination(terms) => {
                let mut acc = 0.0;
                for (alpha, f) in terms {
                    acc += alpha.to_f64().unwrap_or(f64::NAN) * f.eval_ratio(num, den)?;
                }
                acc
            }
            Evaluable::Transfer { n, inner } => {
                let n = *n;
                if n < 2 {
                    return Err(Error::OperatorIndex(n));
                }
                let Some(big_den) = den.checked_mul(n) else {
                    return self.eval_f64(num as f64 / den as f64);
                };
                let mut acc = 0.0;
                for j in 0..n {
                    acc += inner.eval_ratio(num + j * den, big_den)? - inner.eval_ratio(j, n)?;
                }
                acc
            }
        })
    }
}
