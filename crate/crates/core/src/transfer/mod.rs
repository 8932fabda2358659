//! The transfer operators `T_n g(x) = Σ_{j<n} [g((x+j)/n) - g(j/n)]` on
//! functions over `[0, 1]`.
//!
//! A measure `μ` on `[0, 1)` is `×n`-invariant exactly when its
//! distribution function `D_μ(x) = μ[0, x)` is a fixed point of `T_n` (for
//! continuous `μ`), and `T_n T_m = T_{nm}`. This module evaluates the
//! operators on [`Evaluable`] functions and [`GridFunction`] samples,
//! checks the semigroup law and the integral identity for invariant
//! functions, builds distribution functions of discrete measures, computes
//! their Stieltjes-Fourier coefficients, and runs the projected fixed-point
//! search of [`fixpoint`].

mod fixpoint;
mod func;

pub use fixpoint::{fixpoint_search, isotonic_project, FixpointTrace, SearchMode};
pub use func::{Evaluable, GridFunction, StepFunction};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::equidist::{pairwise_sum, EmpiricalMeasure};
use crate::mod1::{turn, CirclePoint};
use crate::{Error, Result};

fn check_index(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::OperatorIndex(n));
    }
    Ok(())
}

fn grid_point(t: usize, k: usize) -> BigRational {
    BigRational::new(BigInt::from(t), BigInt::from(k))
}

/// Value of `f` at `t/K`: exact where possible.
fn value_at(f: &Evaluable, t: usize, k: usize) -> Result<Value> {
    match f.eval_exact(&grid_point(t, k))? {
        Some(v) => Ok(Value::Exact(v)),
        None => Ok(Value::Approx(f.eval_ratio(t as u64, k as u64)?)),
    }
}

enum Value {
    Exact(BigRational),
    Approx(f64),
}

impl Value {
    fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(v) => v.to_f64().unwrap_or(f64::NAN),
            Value::Approx(v) => *v,
        }
    }

    /// `|a - b|`, subtracting exactly when both sides are exact.
    fn distance(&self, other: &Value) -> f64 {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => {
                let d = a - b;
                if d < BigRational::zero() { -d } else { d }
                    .to_f64()
                    .unwrap_or(f64::NAN)
            }
            _ => (self.to_f64() - other.to_f64()).abs(),
        }
    }
}

/// `T_n f` sampled at `t/K`, `t = 0..=K`.
pub fn apply_tn(f: &Evaluable, n: u64, k: usize) -> Result<GridFunction> {
    check_index(n)?;
    if k == 0 {
        return Err(Error::EmptyGrid);
    }
    let tf = Evaluable::transfer(n, f.clone());
    let samples = (0..=k)
        .into_par_iter()
        .map(|t| value_at(&tf, t, k).map(|v| v.to_f64()))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(samples)
}

/// `T_n f` at `t/K` in exact arithmetic, or `None` if some value of `f`
/// could not be resolved exactly.
pub fn apply_tn_exact(f: &Evaluable, n: u64, k: usize) -> Result<Option<Vec<BigRational>>> {
    check_index(n)?;
    if k == 0 {
        return Err(Error::EmptyGrid);
    }
    // T_n f(t/K) = Σ_j f((t + jK)/(nK)) - Σ_j f(j/n); the second sum is
    // shared by all nodes.
    let nb = BigInt::from(n);
    let mut shift = BigRational::zero();
    for j in 0..n {
        match f.eval_exact(&BigRational::new(BigInt::from(j), nb.clone()))? {
            Some(v) => shift += v,
            None => return Ok(None),
        }
    }
    let den = BigInt::from(n) * BigInt::from(k);
    let values = (0..=k)
        .into_par_iter()
        .map(|t| -> Result<Option<BigRational>> {
            let mut acc = BigRational::zero();
            for j in 0..n as usize {
                let x = BigRational::new(BigInt::from(t + j * k), den.clone());
                match f.eval_exact(&x)? {
                    Some(v) => acc += v,
                    None => return Ok(None),
                }
            }
            Ok(Some(acc - &shift))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(values.into_iter().collect())
}

/// `max_t |T_n(T_m f)(t/K) - T_{nm} f(t/K)|`.
///
/// The inner `T_m f` is evaluated pointwise at the points the outer operator
/// needs, never interpolated.
pub fn semigroup_check(f: &Evaluable, n: u64, m: u64, k: usize) -> Result<f64> {
    check_index(n)?;
    check_index(m)?;
    if k == 0 {
        return Err(Error::EmptyGrid);
    }
    let nested = Evaluable::transfer(n, Evaluable::transfer(m, f.clone()));
    let direct = Evaluable::transfer(n * m, f.clone());
    let devs = (0..=k)
        .into_par_iter()
        .map(|t| Ok(value_at(&nested, t, k)?.distance(&value_at(&direct, t, k)?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// `max_{n ∈ ns} max_t |T_n f(t/K) - f(t/K)|`.
pub fn tn_residual(f: &Evaluable, ns: &[u64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::EmptyGrid);
    }
    let mut worst: f64 = 0.0;
    for &n in ns {
        check_index(n)?;
        let tf = Evaluable::transfer(n, f.clone());
        let devs = (0..=k)
            .into_par_iter()
            .map(|t| Ok(value_at(&tf, t, k)?.distance(&value_at(f, t, k)?)))
            .collect::<Result<Vec<f64>>>()?;
        worst = devs.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

/// Both sides of `∫₀¹ f = Σ_{j<n} f(j/n) / (n - 1)` for a `T_n`-invariant `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralCheck {
    /// Composite trapezoid rule on `3^8 + 1` nodes.
    pub quadrature: f64,
    /// Richardson estimate `|T_h - T_{3h}| / 8`.
    pub quadrature_error: f64,
    pub node_sum: f64,
    /// The node sum in exact arithmetic, when `f` allows it.
    pub node_sum_exact: Option<BigRational>,
}

/// Intervals of the trapezoid rule in [`invariant_integral_check`].
pub const QUADRATURE_INTERVALS: u64 = 6561; // 3^8

fn trapezoid(values: &[f64]) -> f64 {
    let n = values.len() - 1;
    let inner: Vec<Complex64> = values[1..n]
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    let ends = 0.5 * (values[0] + values[n]);
    (pairwise_sum(&inner).re + ends) / n as f64
}

pub fn invariant_integral_check(f: &Evaluable, n: u64) -> Result<IntegralCheck> {
    check_index(n)?;
    let fine = (0..=QUADRATURE_INTERVALS)
        .into_par_iter()
        .map(|t| f.eval_ratio(t, QUADRATURE_INTERVALS))
        .collect::<Result<Vec<f64>>>()?;
    let coarse: Vec<f64> = fine.iter().step_by(3).copied().collect();
    let t_fine = trapezoid(&fine);
    let t_coarse = trapezoid(&coarse);

    let nb = BigInt::from(n);
    let mut exact = Some(BigRational::zero());
    let mut approx = 0.0;
    for j in 0..n {
        let x = BigRational::new(BigInt::from(j), nb.clone());
        match f.eval_exact(&x)? {
            Some(v) => {
                approx += v.to_f64().unwrap_or(f64::NAN);
                if let Some(acc) = exact.as_mut() {
                    *acc += v;
                }
            }
            None => {
                approx += f.eval_ratio(j, n)?;
                exact = None;
            }
        }
    }
    let denom = BigRational::from_integer(BigInt::from(n - 1));
    let node_sum_exact = exact.map(|s| s / denom);
    let node_sum = match &node_sum_exact {
        Some(v) => v.to_f64().unwrap_or(f64::NAN),
        None => approx / (n - 1) as f64,
    };
    Ok(IntegralCheck {
        quadrature: t_fine,
        quadrature_error: (t_fine - t_coarse).abs() / 8.0,
        node_sum,
        node_sum_exact,
    })
}

/// A probability measure with finitely many atoms in `[0, 1)`.
pub trait DiscreteMeasure {
    /// `(position, weight)` pairs; weights sum to 1.
    fn atoms(&self) -> Vec<(BigRational, BigRational)>;
}

impl<P: CirclePoint> DiscreteMeasure for EmpiricalMeasure<P> {
    fn atoms(&self) -> Vec<(BigRational, BigRational)> {
        let w = BigRational::new(BigInt::one(), BigInt::from(self.len()));
        self.points()
            .iter()
            .map(|p| (p.to_ratio(), w.clone()))
            .collect()
    }
}

/// A nondecreasing function with `D(0) = 0` and `D(1) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionFunction(Evaluable);

/// Points used to spot-check monotonicity in [`DistributionFunction::new`].
const MONOTONE_PROBES: u64 = 729;

impl DistributionFunction {
    /// Validates anchoring exactly (when possible) and monotonicity on a
    /// probe grid.
    pub fn new(f: Evaluable) -> Result<Self> {
        for (x, want) in [(BigRational::zero(), 0.0), (BigRational::one(), 1.0)] {
            let v = f.eval(&x)?;
            if v != want {
                return Err(Error::NotDistribution(format!("D({x}) = {v}")));
            }
        }
        let mut prev = 0.0;
        for t in 0..=MONOTONE_PROBES {
            let v = f.eval_ratio(t, MONOTONE_PROBES)?;
            if v < prev {
                return Err(Error::NotDistribution(format!(
                    "decreases near {t}/{MONOTONE_PROBES}"
                )));
            }
            prev = v;
        }
        Ok(Self(f))
    }

    pub fn lebesgue() -> Self {
        Self(Evaluable::Identity)
    }

    pub fn cantor() -> Self {
        Self(Evaluable::Cantor)
    }

    pub fn function(&self) -> &Evaluable {
        &self.0
    }

    pub fn into_function(self) -> Evaluable {
        self.0
    }
}

/// `D(x) = μ[0, x)` as an exact step function.
pub fn distribution_of(m: &impl DiscreteMeasure) -> DistributionFunction {
    DistributionFunction(Evaluable::Step(StepFunction::new(m.atoms())))
}

/// A Fourier coefficient with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierCoefficient {
    pub k: i64,
    pub depth: u32,
    pub value: Complex64,
    /// Distance to the same sum on the next refinement.
    pub err: f64,
}

fn partition_size(depth: u32) -> Result<u64> {
    3u64.checked_pow(depth)
        .and_then(|v| v.checked_mul(2))
        .filter(|&m| m < (1u64 << 40))
        .ok_or(Error::OutOfDomain(format!("depth {depth}")))
}

/// Increments `D(x_{m+1}) - D(x_m)` on the partition `x_m = m / (2·3^depth)`.
fn increments(d: &DistributionFunction, depth: u32) -> Result<(u64, Vec<f64>)> {
    let size = partition_size(depth)?;
    let values = (0..=size)
        .into_par_iter()
        .map(|m| d.0.eval_ratio(m, size))
        .collect::<Result<Vec<f64>>>()?;
    Ok((size, values.windows(2).map(|w| w[1] - w[0]).collect()))
}

fn stieltjes_sum(k: i64, size: u64, incs: &[f64]) -> Complex64 {
    let size_i = i128::from(size);
    let terms: Vec<Complex64> = incs
        .par_iter()
        .enumerate()
        .map(|(m, &dv)| {
            let r = (-i128::from(k) * m as i128).rem_euclid(size_i) as u64;
            turn(r, size) * dv
        })
        .collect();
    pairwise_sum(&terms)
}

/// `Σ_m e(-k x_m) [D(x_{m+1}) - D(x_m)]` over `2·3^depth` cells; the error is
/// the change on refining to `depth + 1`.
pub fn stieltjes_fourier(
    d: &DistributionFunction,
    k: i64,
    depth: u32,
) -> Result<FourierCoefficient> {
    Ok(stieltjes_fourier_many(d, &[k], depth)?.remove(0))
}

/// [`stieltjes_fourier`] for several frequencies, sharing the partitions.
pub fn stieltjes_fourier_many(
    d: &DistributionFunction,
    ks: &[i64],
    depth: u32,
) -> Result<Vec<FourierCoefficient>> {
    if depth == 0 {
        return Err(Error::OutOfDomain("depth 0".into()));
    }
    let (size, incs) = increments(d, depth)?;
    let (fine_size, fine_incs) = increments(d, depth + 1)?;
    Ok(ks
        .iter()
        .map(|&k| {
            let value = stieltjes_sum(k, size, &incs);
            let refined = stieltjes_sum(k, fine_size, &fine_incs);
            FourierCoefficient {
                k,
                depth,
                value,
                err: (refined - value).norm(),
            }
        })
        .collect())
}
