//! Counting functions, Weyl sums, discrepancy and ergodic averages.
//!
//! Intervals are half-open, `[a, b)`. Membership is decided on the exact
//! value of each point: the reduced fraction for [`Mod1Rational`], the
//! mantissa for [`Mod1Fixed`] (its error bound is ignored when counting).
//!
//! Complex sums use pairwise summation with leaves of [`PAIRWISE_BLOCK`]
//! terms, and grid sums reduce each row first and then the row totals, both
//! along fixed trees. Results are therefore bit-identical for any number of
//! worker threads.
//!
//! [`Mod1Rational`]: crate::mod1::Mod1Rational
//! [`Mod1Fixed`]: crate::mod1::Mod1Fixed

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};

use crate::mod1::{CirclePoint, OrbitGrid};
use crate::transfer::Evaluable;
use crate::{Error, Result};

/// Leaf size of the pairwise summation tree.
pub const PAIRWISE_BLOCK: usize = 1024;

/// Sum along a fixed binary tree with sequential leaves of at most
/// [`PAIRWISE_BLOCK`] terms.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().fold(Complex64::zero(), |acc, v| acc + v);
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    if values.len() >= 8 * PAIRWISE_BLOCK {
        let (a, b) = rayon::join(|| pairwise_sum(lo), || pairwise_sum(hi));
        a + b
    } else {
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// Rounding bound for the mean of `n` unit-modulus terms summed pairwise.
fn summation_error(n: usize) -> f64 {
    let depth = (n.max(1) as f64).log2().ceil();
    (PAIRWISE_BLOCK as f64 + depth + 2.0) * f64::EPSILON
}

/// Uniform probability measure on a nonempty list of points.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure<P> {
    points: Vec<P>,
}

impl<P: CirclePoint> EmpiricalMeasure<P> {
    pub fn new(points: Vec<P>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self { points })
    }

    /// The `N²` orbit points of a grid, each with weight `1/N²`.
    pub fn from_grid(grid: &OrbitGrid<P>) -> Self {
        Self {
            points: grid.points(),
        }
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Weight of each point.
    pub fn weight(&self) -> Ratio<u64> {
        Ratio::new(1, self.points.len() as u64)
    }
}

/// A normalized exponential sum `(1/n) Σ e(k x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylSum {
    pub k: i64,
    pub n_terms: usize,
    pub value: Complex64,
    /// Bound on the distance from `value` to the exact mean.
    pub err: f64,
}

fn check_interval(a: &BigRational, b: &BigRational) -> Result<()> {
    if a < &BigRational::zero() || a >= b || b > &BigRational::one() {
        return Err(Error::BadInterval {
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    Ok(())
}

fn prefix<P>(points: &[P], n: usize) -> Result<&[P]> {
    if points.is_empty() || n == 0 {
        return Err(Error::Empty);
    }
    points.get(..n).ok_or(Error::NotEnoughPoints {
        requested: n,
        available: points.len(),
    })
}

/// `A([a, b); N) = |{x_1..x_N} ∩ [a, b)| / N`.
pub fn count_in_interval<P: CirclePoint>(
    points: &[P],
    a: &BigRational,
    b: &BigRational,
    n: usize,
) -> Result<Ratio<u64>> {
    check_interval(a, b)?;
    let pts = prefix(points, n)?;
    let hits = pts
        .iter()
        .filter(|x| {
            let v = x.to_ratio();
            a <= &v && &v < b
        })
        .count();
    Ok(Ratio::new(hits as u64, n as u64))
}

/// `A([a, b); N, N)` over the square of an orbit grid.
pub fn count_in_interval_square<P: CirclePoint>(
    grid: &OrbitGrid<P>,
    a: &BigRational,
    b: &BigRational,
) -> Result<Ratio<u64>> {
    check_interval(a, b)?;
    let hits: usize = grid
        .map_rows(|_, row| {
            row.iter()
                .filter(|x| {
                    let v = x.to_ratio();
                    a <= &v && &v < b
                })
                .count()
        })
        .into_iter()
        .sum();
    Ok(Ratio::new(hits as u64, grid.len() as u64))
}

/// `(1/N) Σ_{n=1..N} e(k x_n)` over the first `n` points.
pub fn weyl_sum_single<P: CirclePoint>(seq: &[P], k: i64, n: usize) -> Result<WeylSum> {
    if k == 0 {
        return Err(Error::ZeroFrequency);
    }
    let pts = prefix(seq, n)?;
    let phases: Vec<Complex64> = pts.iter().map(|x| x.phase(k)).collect();
    let max_phase_err = pts.iter().map(|x| x.phase_error(k)).fold(0.0, f64::max);
    Ok(WeylSum {
        k,
        n_terms: n,
        value: pairwise_sum(&phases) / n as f64,
        err: max_phase_err + summation_error(n),
    })
}

/// `(1/N²) Σ_{i,j<N} e(k p^i q^j x)`.
pub fn weyl_sum_square<P: CirclePoint>(grid: &OrbitGrid<P>, k: i64) -> Result<WeylSum> {
    if k == 0 {
        return Err(Error::ZeroFrequency);
    }
    let rows = grid.map_rows(|_, row| {
        let phases: Vec<Complex64> = row.iter().map(|x| x.phase(k)).collect();
        let err = row.iter().map(|x| x.phase_error(k)).fold(0.0, f64::max);
        (pairwise_sum(&phases), err)
    });
    let sums: Vec<Complex64> = rows.iter().map(|r| r.0).collect();
    let max_phase_err = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let n = grid.len();
    Ok(WeylSum {
        k,
        n_terms: n,
        value: pairwise_sum(&sums) / n as f64,
        err: max_phase_err + summation_error(n),
    })
}

/// A test function on the circle.
#[derive(Clone, Debug)]
pub enum Observable {
    /// `z^k = e(k x)`.
    Character(i64),
    /// A real function on `[0, 1]`, evaluated at the exact point value.
    Real(Evaluable),
}

impl Observable {
    pub fn eval<P: CirclePoint>(&self, x: &P) -> Result<Complex64> {
        match self {
            Observable::Character(k) => Ok(x.phase(*k)),
            Observable::Real(f) => Ok(Complex64::new(f.eval(&x.to_ratio())?, 0.0)),
        }
    }
}

/// `(1/N²) Σ_{i,j<N} f(p^i q^j x mod 1)`.
pub fn ergodic_average<P: CirclePoint>(grid: &OrbitGrid<P>, f: &Observable) -> Result<Complex64> {
    let rows = grid.map_rows(|_, row| -> Result<Complex64> {
        let vals = row.iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
        Ok(pairwise_sum(&vals))
    });
    let sums = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&sums) / grid.len() as f64)
}

/// Star discrepancy `sup_b |A([0, b); N) - b|` of the first `n` points.
///
/// Uses the sorted-points formula
/// `max_i max(i/N - x_(i), x_(i) - (i-1)/N)`, evaluated exactly. The
/// unanchored discrepancy over all `[a, b)` is at most twice this value.
pub fn star_discrepancy<P: CirclePoint>(points: &[P], n: usize) -> Result<f64> {
    let pts = prefix(points, n)?;
    let mut xs: Vec<BigRational> = pts.iter().map(|x| x.to_ratio()).collect();
    xs.sort();
    let big_n = BigInt::from(n);
    let mut best = BigRational::zero();
    for (idx, x) in xs.iter().enumerate() {
        let i = BigInt::from(idx + 1);
        let above = BigRational::new(i.clone(), big_n.clone()) - x;
        let below = x - BigRational::new(i - 1, big_n.clone());
        for d in [above, below] {
            if d > best {
                best = d;
            }
        }
    }
    Ok(best.to_f64().unwrap_or(f64::NAN))
}

/// `D(x) = m[0, x)`, the fraction of points strictly below `x`.
pub fn empirical_cdf<P: CirclePoint>(
    m: &EmpiricalMeasure<P>,
    x: &BigRational,
) -> Result<Ratio<u64>> {
    if x < &BigRational::zero() || x > &BigRational::one() {
        return Err(Error::OutOfDomain(x.to_string()));
    }
    let below = m.points.iter().filter(|p| &p.to_ratio() < x).count();
    Ok(Ratio::new(below as u64, m.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mod1::{Mod1Fixed, Mod1Rational, MultiplierPair};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Mod1Rational {
        Mod1Rational::new(n, d).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pair23() -> MultiplierPair {
        MultiplierPair::new(2, 3).unwrap()
    }

    #[test]
    fn counting_examples() {
        let pts = vec![r(0, 1), r(1, 4), r(1, 2), r(3, 4)];
        assert_eq!(
            count_in_interval(&pts, &q(0, 1), &q(1, 2), 4).unwrap(),
            Ratio::new(2, 4)
        );
        assert_eq!(
            count_in_interval(&pts, &q(0, 1), &q(1, 1), 3).unwrap(),
            Ratio::new(1, 1)
        );
        assert!(count_in_interval(&pts, &q(1, 2), &q(1, 4), 4).is_err());
        assert!(count_in_interval::<Mod1Rational>(&[], &q(0, 1), &q(1, 1), 1).is_err());
        assert!(count_in_interval(&pts, &q(0, 1), &q(1, 1), 5).is_err());
    }

    #[test]
    fn counting_orbit_of_one_fifth() {
        // Oracle: the 16 values 2^i 3^j mod 5, each in {1,2,3,4}, counted by hand.
        let grid = OrbitGrid::new(r(1, 5), pair23(), 4).unwrap();
        let pts = grid.points();
        let mut oracle = 0;
        for i in 0..4u32 {
            for j in 0..4u32 {
                let res = 2u64.pow(i) * 3u64.pow(j) % 5;
                if 2 * res < 5 {
                    oracle += 1;
                }
            }
        }
        assert_eq!(oracle, 8);
        let got = count_in_interval(&pts, &q(0, 1), &q(1, 2), 16).unwrap();
        assert_eq!(got, Ratio::new(oracle, 16));
        assert_eq!(
            count_in_interval_square(&grid, &q(0, 1), &q(1, 2)).unwrap(),
            got
        );
    }

    #[test]
    fn weyl_single_examples() {
        let zeros = vec![Mod1Rational::zero(); 100];
        assert_eq!(
            weyl_sum_single(&zeros, 1, 100).unwrap().value,
            Complex64::new(1.0, 0.0)
        );
        let quarters: Vec<_> = (1..=40).map(|n| r(n, 4)).collect();
        assert_eq!(
            weyl_sum_single(&quarters, 4, 40).unwrap().value,
            Complex64::new(1.0, 0.0)
        );
        let s = weyl_sum_single(&quarters, 1, 40).unwrap();
        assert!(s.value.norm() < 1e-15);
        assert_eq!(weyl_sum_single(&quarters, 0, 40), Err(Error::ZeroFrequency));
    }

    #[test]
    fn weyl_square_examples() {
        let grid0 = OrbitGrid::new(Mod1Rational::zero(), pair23(), 7).unwrap();
        assert_eq!(
            weyl_sum_square(&grid0, 1).unwrap().value,
            Complex64::new(1.0, 0.0)
        );
        let grid = OrbitGrid::new(r(1, 5), pair23(), 4).unwrap();
        let s5 = weyl_sum_square(&grid, 5).unwrap();
        assert_eq!(s5.value, Complex64::new(1.0, 0.0));
        // Oracle: direct 16-term sum with cos/sin of the exact residues.
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..4u32 {
            for j in 0..4u32 {
                let res = (2u64.pow(i) * 3u64.pow(j) % 5) as f64;
                let ang = std::f64::consts::TAU * res / 5.0;
                re += ang.cos();
                im += ang.sin();
            }
        }
        let s1 = weyl_sum_square(&grid, 1).unwrap();
        assert!((s1.value.re - re / 16.0).abs() < 1e-14);
        assert!((s1.value.im - im / 16.0).abs() < 1e-14);
        assert!(s1.value.norm() <= 1.0 + s1.err);
    }

    #[test]
    fn ergodic_average_examples() {
        let grid0 = OrbitGrid::new(Mod1Rational::zero(), pair23(), 5).unwrap();
        assert_eq!(
            ergodic_average(&grid0, &Observable::Character(1)).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        let grid = OrbitGrid::new(r(1, 5), pair23(), 64).unwrap();
        let avg = ergodic_average(&grid, &Observable::Character(1)).unwrap();
        assert!((avg - Complex64::new(-0.25, 0.0)).norm() < 0.05);
        let grid8 = OrbitGrid::new(r(1, 5), pair23(), 8).unwrap();
        let one = Evaluable::Polynomial(vec![q(1, 1)]);
        assert_eq!(
            ergodic_average(&grid8, &Observable::Real(one)).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn orbit_translated_bases_agree() {
        // x' = 2^a 3^b x lies on the same orbit; for x = 1/5 the gap is
        // measured empirically as 0 up to rounding, frozen at C/N with C = 4.
        let x = r(1, 5);
        for (a, b) in [(1, 0), (0, 1), (2, 3)] {
            let y = x.scale_pow(2, a, 3, b).unwrap();
            for n in [8usize, 16, 32] {
                let ax = ergodic_average(
                    &OrbitGrid::new(x.clone(), pair23(), n).unwrap(),
                    &Observable::Character(1),
                )
                .unwrap();
                let ay = ergodic_average(
                    &OrbitGrid::new(y.clone(), pair23(), n).unwrap(),
                    &Observable::Character(1),
                )
                .unwrap();
                assert!((ax - ay).norm() <= 4.0 / n as f64);
            }
        }
    }

    #[test]
    fn star_discrepancy_examples() {
        assert_eq!(star_discrepancy(&[r(1, 2)], 1).unwrap(), 0.5);
        assert_eq!(
            star_discrepancy(&vec![Mod1Rational::zero(); 4], 4).unwrap(),
            1.0
        );
        for n in [1i64, 2, 5, 16, 33] {
            let pts: Vec<_> = (0..n).map(|k| r(2 * k + 1, 2 * n)).collect();
            let d = star_discrepancy(&pts, n as usize).unwrap();
            assert!((d - 1.0 / (2 * n) as f64).abs() < 1e-15);
            // Brute force: scan b over the points and just past them.
            let mut brute: f64 = 0.0;
            let vals: Vec<f64> = pts.iter().map(|p| p.to_f64()).collect();
            for &b in vals.iter().chain([0.0, 1.0].iter()) {
                for bb in [b, b + 1e-12] {
                    let count = vals.iter().filter(|&&v| v < bb).count() as f64;
                    brute = brute.max((count / n as f64 - bb).abs());
                }
            }
            assert!((brute - d).abs() < 1e-9);
        }
    }

    #[test]
    fn cdf_examples() {
        let m = EmpiricalMeasure::new(vec![r(1, 5), r(2, 5), r(3, 5), r(4, 5)]).unwrap();
        assert_eq!(empirical_cdf(&m, &q(1, 2)).unwrap(), Ratio::new(1, 2));
        assert_eq!(empirical_cdf(&m, &q(0, 1)).unwrap(), Ratio::new(0, 1));
        assert_eq!(empirical_cdf(&m, &q(1, 1)).unwrap(), Ratio::new(1, 1));
        assert!(EmpiricalMeasure::<Mod1Rational>::new(vec![]).is_err());
    }

    #[test]
    fn fixed_counting_uses_mantissa() {
        let x = Mod1Fixed::from_rational(&r(1, 2), 64);
        assert_eq!(
            count_in_interval(std::slice::from_ref(&x), &q(1, 2), &q(1, 1), 1).unwrap(),
            Ratio::new(1, 1)
        );
        assert_eq!(
            count_in_interval(&[x], &q(0, 1), &q(1, 2), 1).unwrap(),
            Ratio::new(0, 1)
        );
    }

    #[test]
    fn rational_and_fixed_weyl_sums_agree() {
        use crate::mod1::{required_bits, OUTPUT_BITS};
        let side = 16usize;
        let bits = required_bits(2, 15, 3, 15, OUTPUT_BITS) as u32;
        let mut state = 12345u64;
        for _ in 0..50 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let den = 2 + (state >> 33) % 100_000;
            let num = (state >> 7) % den;
            let x = r(num as i64, den as i64);
            let fx = Mod1Fixed::from_rational(&x, bits);
            for k in [1, 3] {
                let a = weyl_sum_square(&OrbitGrid::new(x.clone(), pair23(), side).unwrap(), k)
                    .unwrap();
                let b = weyl_sum_square(&OrbitGrid::new(fx.clone(), pair23(), side).unwrap(), k)
                    .unwrap();
                assert!((a.value - b.value).norm() <= 2f64.powi(-40));
            }
        }
    }

    #[test]
    fn pairwise_sum_is_schedule_independent() {
        let vals: Vec<Complex64> = (0..50_000)
            .map(|i| crate::mod1::turn(i * 7919 % 10007, 10007))
            .collect();
        let reference = pairwise_sum(&vals);
        for threads in [1, 3, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let got = pool.install(|| pairwise_sum(&vals));
            assert_eq!(got.re.to_bits(), reference.re.to_bits());
            assert_eq!(got.im.to_bits(), reference.im.to_bits());
        }
    }

    proptest! {
        #[test]
        fn weyl_bounded_by_discrepancy(n in 1usize..200, shift in 0u64..1000) {
            // Equispaced family shifted by shift/(1000 n): discrepancy ≤ 1/n.
            let pts: Vec<_> = (0..n as i64)
                .map(|k| r(1000 * k + shift as i64, 1000 * n as i64))
                .collect();
            let eps = star_discrepancy(&pts, n).unwrap();
            for k in 1..=8i64 {
                let w = weyl_sum_single(&pts, k, n).unwrap();
                let bound = 4.0 * std::f64::consts::PI * k as f64 * eps + 2.0 / n as f64;
                prop_assert!(w.value.norm() <= bound + 1e-12);
            }
        }

        #[test]
        fn weyl_sum_bounded_by_one(num in 0i64..1000, den in 1i64..1000, k in 1i64..20) {
            let grid = OrbitGrid::new(r(num, den), pair23(), 9).unwrap();
            let s = weyl_sum_square(&grid, k).unwrap();
            prop_assert!(s.value.norm() <= 1.0 + s.err);
        }
    }
}
