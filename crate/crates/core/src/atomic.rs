//! Finitely supported ergodic `×p, ×q`-invariant measures on `{j/s}`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};

use crate::equidist::{ergodic_average, pairwise_sum, Observable};
use crate::mod1::{scale_pow, turn, Mod1Rational, MultiplierPair, OrbitGrid};
use crate::transfer::DiscreteMeasure;
use crate::{Error, Result};

/// A point `s/t` on the orbit of `x` with `gcd(t, pq) = 1`, reached as
/// `p^a q^b x mod 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoprimeOrbitForm {
    pub s: BigUint,
    pub t: BigUint,
    /// Exponents `(a, b)`.
    pub witness: (u32, u32),
}

impl CoprimeOrbitForm {
    pub fn point(&self) -> Mod1Rational {
        Mod1Rational::new(BigInt::from(self.s.clone()), BigInt::from(self.t.clone()))
            .expect("t is positive")
    }
}

/// Multiplies `x` by `p` until its denominator is coprime to `p`, then by
/// `q` likewise.
pub fn reduce_to_coprime(x: &Mod1Rational, p: u64, q: u64) -> Result<CoprimeOrbitForm> {
    for m in [p, q] {
        if m < 2 {
            return Err(Error::MultiplierTooSmall(m));
        }
    }
    let mut y = x.clone();
    let mut exps = [0u32; 2];
    for (e, m) in exps.iter_mut().zip([p, q]) {
        let mb = BigUint::from(m);
        while !y.den().gcd(&mb).is_one() {
            y = scale_pow(&y, m, 1, m, 0)?;
            *e += 1;
        }
    }
    Ok(CoprimeOrbitForm {
        s: y.num().clone(),
        t: y.den().clone(),
        witness: (exps[0], exps[1]),
    })
}

fn check_modulus(s: u64, p: u64, q: u64) -> Result<()> {
    if s == 0 || s.gcd(&p) != 1 || s.gcd(&q) != 1 {
        return Err(Error::ModulusNotCoprime { modulus: s, p, q });
    }
    Ok(())
}

/// Smallest set of residues mod `s` containing `seed` and closed under
/// `r ↦ pr` and `r ↦ qr`.
pub fn multiplicative_orbit(seed: u64, s: u64, p: u64, q: u64) -> Result<BTreeSet<u64>> {
    check_modulus(s, p, q)?;
    if seed >= s {
        return Err(Error::ResidueOutOfRange {
            residue: seed,
            modulus: s,
        });
    }
    let (pm, qm) = (p % s, q % s);
    let mut seen = BTreeSet::from([seed]);
    let mut queue = VecDeque::from([seed]);
    while let Some(r) = queue.pop_front() {
        for m in [pm, qm] {
            let next = ((r as u128 * m as u128) % s as u128) as u64;
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    Ok(seen)
}

/// A probability measure on `{j/s : 0 ≤ j < s}` with `gcd(s, pq) = 1`.
///
/// Measures built by [`build_atomic_measure`] are uniform on one
/// multiplicative orbit. Pushforwards under `×n` with `gcd(n, s) > 1` can
/// merge atoms, so weights are stored per residue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicMeasure {
    pair: MultiplierPair,
    modulus: u64,
    weights: BTreeMap<u64, Ratio<u64>>,
}

impl AtomicMeasure {
    /// Uniform measure on `support`, which must be closed under `×p` and `×q`.
    pub fn uniform(pair: MultiplierPair, modulus: u64, support: &BTreeSet<u64>) -> Result<Self> {
        check_modulus(modulus, pair.p(), pair.q())?;
        if support.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(&r) = support.iter().find(|&&r| r >= modulus) {
            return Err(Error::ResidueOutOfRange {
                residue: r,
                modulus,
            });
        }
        let w = Ratio::new(1, support.len() as u64);
        Ok(Self {
            pair,
            modulus,
            weights: support.iter().map(|&r| (r, w)).collect(),
        })
    }

    pub fn pair(&self) -> MultiplierPair {
        self.pair
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Residues with positive mass, in increasing order.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.weights.keys().copied()
    }

    pub fn weights(&self) -> &BTreeMap<u64, Ratio<u64>> {
        &self.weights
    }

    /// Mass of the atom at `x`, zero if `x` is not of the form `j/s`.
    pub fn mass_at(&self, x: &Mod1Rational) -> Ratio<u64> {
        let s = BigUint::from(self.modulus);
        if !(&s % x.den()).is_zero() {
            return Ratio::zero();
        }
        let r = (x.num() * (&s / x.den()))
            .to_u64()
            .expect("residue below modulus");
        self.weights.get(&r).copied().unwrap_or_else(Ratio::zero)
    }

    /// Whether the support is closed under `×p` and `×q`.
    pub fn is_invariant(&self) -> bool {
        [self.pair.p(), self.pair.q()]
            .into_iter()
            .all(|n| pushforward_times_n(self, n).is_ok_and(|m| m == *self))
    }
}

impl DiscreteMeasure for AtomicMeasure {
    fn atoms(&self) -> Vec<(BigRational, BigRational)> {
        let s = BigInt::from(self.modulus);
        self.weights
            .iter()
            .map(|(&r, w)| {
                (
                    BigRational::new(BigInt::from(r), s.clone()),
                    BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom())),
                )
            })
            .collect()
    }
}

/// Uniform measure on the orbit of the coprime-denominator point reached
/// from `seed`.
pub fn build_atomic_measure(seed: &Mod1Rational, pair: MultiplierPair) -> Result<AtomicMeasure> {
    let form = reduce_to_coprime(seed, pair.p(), pair.q())?;
    let s = form.t.to_u64().ok_or(Error::ModulusTooLarge)?;
    let r = form.s.to_u64().expect("numerator below modulus");
    let orbit = multiplicative_orbit(r, s, pair.p(), pair.q())?;
    AtomicMeasure::uniform(pair, s, &orbit)
}

/// Image of `m` under `x ↦ nx mod 1`.
pub fn pushforward_times_n(m: &AtomicMeasure, n: u64) -> Result<AtomicMeasure> {
    if n == 0 {
        return Err(Error::MultiplierTooSmall(0));
    }
    let s = m.modulus as u128;
    let n = n as u128 % s;
    let mut weights: BTreeMap<u64, Ratio<u64>> = BTreeMap::new();
    for (&r, &w) in &m.weights {
        let image = ((r as u128 * n) % s) as u64;
        *weights.entry(image).or_insert_with(Ratio::zero) += w;
    }
    Ok(AtomicMeasure {
        weights,
        ..m.clone()
    })
}

/// `μ(z^k) = Σ_r w_r e(k r / s)`.
///
/// Evaluated as the pushforward by `×k` paired with `z`, so that
/// `μ(z^k)` and `μ(z^{kn})` agree bit for bit whenever `μ` is `×n`-invariant.
pub fn measure_moment(m: &AtomicMeasure, k: i64) -> Complex64 {
    let s = m.modulus;
    let kk = k.rem_euclid(s as i64) as u128;
    let mut weights: BTreeMap<u64, Ratio<u64>> = BTreeMap::new();
    for (&r, &w) in &m.weights {
        let image = ((r as u128 * kk) % s as u128) as u64;
        *weights.entry(image).or_insert_with(Ratio::zero) += w;
    }
    let terms: Vec<Complex64> = weights
        .iter()
        .map(|(&r, w)| turn(r, s) * (*w.numer() as f64 / *w.denom() as f64))
        .collect();
    pairwise_sum(&terms)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenericReport {
    /// Average of `z^k` over the square orbit of side `N`.
    pub average: Complex64,
    /// `μ(z^k)`.
    pub target: Complex64,
    pub gap: f64,
    /// `x` is not an atom of `μ`, so no convergence is expected.
    pub exploratory: bool,
}

/// Compares the square ergodic average of `z^k` at `x` with `μ(z^k)`.
pub fn generic_point_check(
    x: &Mod1Rational,
    m: &AtomicMeasure,
    k: i64,
    side: usize,
) -> Result<GenericReport> {
    let grid = OrbitGrid::new(x.clone(), m.pair, side)?;
    let average = ergodic_average(&grid, &Observable::Character(k))?;
    let target = measure_moment(m, k);
    Ok(GenericReport {
        average,
        target,
        gap: (average - target).norm(),
        exploratory: m.mass_at(x).is_zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair() -> MultiplierPair {
        MultiplierPair::new(2, 3).unwrap()
    }

    fn rat(a: i64, b: i64) -> Mod1Rational {
        Mod1Rational::new(a, b).unwrap()
    }

    fn set(v: &[u64]) -> BTreeSet<u64> {
        v.iter().copied().collect()
    }

    /// Oracle: smallest `(a, b)` by `a + b` with `p^a q^b x` of denominator coprime to `pq`.
    fn brute_witness(x: &Mod1Rational) -> (u32, u32) {
        for total in 0..12u32 {
            for a in 0..=total {
                let y = scale_pow(x, 2, a, 3, total - a).unwrap();
                if y.den().gcd(&BigUint::from(6u8)) == BigUint::from(1u8) {
                    return (a, total - a);
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn reduce_examples() {
        let f = reduce_to_coprime(&rat(3, 20), 2, 3).unwrap();
        assert_eq!((f.point(), f.witness), (rat(3, 5), (2, 0)));
        let f = reduce_to_coprime(&rat(5, 6), 2, 3).unwrap();
        assert_eq!((f.point(), f.witness), (Mod1Rational::zero(), (1, 1)));
        assert_eq!(f.t, BigUint::from(1u8));
        let f = reduce_to_coprime(&rat(1, 7), 2, 3).unwrap();
        assert_eq!((f.point(), f.witness), (rat(1, 7), (0, 0)));
    }

    #[test]
    fn reduce_matches_brute_force() {
        for den in 1..200i64 {
            for num in [1, den / 2, den - 1] {
                let x = rat(num, den);
                let f = reduce_to_coprime(&x, 2, 3).unwrap();
                assert_eq!(f.witness, brute_witness(&x), "{x}");
                assert_eq!(
                    f.point(),
                    scale_pow(&x, 2, f.witness.0, 3, f.witness.1).unwrap()
                );
            }
        }
    }

    #[test]
    fn orbit_examples() {
        assert_eq!(
            multiplicative_orbit(1, 5, 2, 3).unwrap(),
            set(&[1, 2, 3, 4])
        );
        assert_eq!(multiplicative_orbit(0, 5, 2, 3).unwrap(), set(&[0]));
        assert_eq!(
            multiplicative_orbit(1, 7, 2, 3).unwrap(),
            set(&[1, 2, 3, 4, 5, 6])
        );
        assert_eq!(multiplicative_orbit(1, 35, 2, 3).unwrap().len(), 24);
        assert_eq!(
            multiplicative_orbit(1, 10, 2, 3),
            Err(Error::ModulusNotCoprime {
                modulus: 10,
                p: 2,
                q: 3
            })
        );
        assert_eq!(
            multiplicative_orbit(5, 5, 2, 3),
            Err(Error::ResidueOutOfRange {
                residue: 5,
                modulus: 5
            })
        );
    }

    #[test]
    fn orbits_partition_residues() {
        for s in [1u64, 5, 7, 11, 13, 25, 35, 77, 91, 143] {
            let mut covered = BTreeSet::new();
            let mut orbits: Vec<BTreeSet<u64>> = Vec::new();
            for r in 0..s {
                let o = multiplicative_orbit(r, s, 2, 3).unwrap();
                assert!(o.contains(&r));
                if let Some(prev) = orbits.iter().find(|prev| !prev.is_disjoint(&o)) {
                    assert_eq!(prev, &o, "s = {s}");
                } else {
                    covered.extend(o.iter().copied());
                    orbits.push(o);
                }
            }
            assert_eq!(covered, (0..s).collect());
        }
    }

    #[test]
    fn build_examples() {
        let m = build_atomic_measure(&rat(1, 5), pair()).unwrap();
        assert_eq!(m.modulus(), 5);
        assert_eq!(m.support().collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        assert!(m.weights().values().all(|w| *w == Ratio::new(1, 4)));
        let dirac = build_atomic_measure(&Mod1Rational::zero(), pair()).unwrap();
        assert_eq!(dirac.support().collect::<Vec<_>>(), vec![0]);
        assert_eq!(build_atomic_measure(&rat(3, 20), pair()).unwrap(), m);
        assert_eq!(m.mass_at(&rat(3, 5)), Ratio::new(1, 4));
        assert_eq!(m.mass_at(&rat(1, 7)), Ratio::zero());
    }

    #[test]
    fn pushforward_examples() {
        let m = build_atomic_measure(&rat(1, 5), pair()).unwrap();
        assert_eq!(pushforward_times_n(&m, 2).unwrap(), m);
        let dirac = build_atomic_measure(&Mod1Rational::zero(), pair()).unwrap();
        assert_eq!(pushforward_times_n(&dirac, 7).unwrap(), dirac);
        let m7 = build_atomic_measure(&rat(1, 7), pair()).unwrap();
        assert_eq!(pushforward_times_n(&m7, 3).unwrap(), m7);
        let collapsed = pushforward_times_n(&m, 5).unwrap();
        assert_eq!(
            collapsed.weights(),
            &BTreeMap::from([(0, Ratio::from_integer(1))])
        );
        assert!(m.is_invariant() && m7.is_invariant());
    }

    #[test]
    fn moment_examples() {
        let m = build_atomic_measure(&rat(1, 5), pair()).unwrap();
        let z = measure_moment(&m, 1);
        assert!((z.re + 0.25).abs() < 1e-15 && z.im.abs() < 1e-15);
        assert_eq!(measure_moment(&m, 0), Complex64::new(1.0, 0.0));
        let dirac = build_atomic_measure(&Mod1Rational::zero(), pair()).unwrap();
        assert_eq!(measure_moment(&dirac, 3), Complex64::new(1.0, 0.0));
        assert!((measure_moment(&m, -1) - measure_moment(&m, 1).conj()).norm() < 1e-15);
    }

    #[test]
    fn moment_matches_direct_sum() {
        let m = build_atomic_measure(&rat(1, 91), pair()).unwrap();
        for k in -5..20i64 {
            let direct: Complex64 = m
                .weights()
                .iter()
                .map(|(&r, w)| {
                    let theta = 2.0 * std::f64::consts::PI * (k as f64 * r as f64 / 91.0);
                    Complex64::from_polar(*w.numer() as f64 / *w.denom() as f64, theta)
                })
                .sum();
            assert!((measure_moment(&m, k) - direct).norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn generic_examples() {
        let dirac = build_atomic_measure(&Mod1Rational::zero(), pair()).unwrap();
        let r = generic_point_check(&Mod1Rational::zero(), &dirac, 1, 16).unwrap();
        assert_eq!(r.gap, 0.0);
        let m = build_atomic_measure(&rat(1, 5), pair()).unwrap();
        let r = generic_point_check(&rat(1, 5), &m, 5, 8).unwrap();
        assert!(r.gap < 1e-12 && !r.exploratory);
        let r = generic_point_check(&rat(1, 5), &m, 1, 64).unwrap();
        assert!(r.gap <= 0.1);
        let r = generic_point_check(&rat(1, 7), &m, 1, 8).unwrap();
        assert!(r.exploratory);
    }

    #[test]
    fn translated_base_converges_with_the_original() {
        let m = build_atomic_measure(&rat(1, 5), pair()).unwrap();
        for side in [32usize, 128] {
            let a = generic_point_check(&rat(1, 5), &m, 1, side).unwrap();
            let b = generic_point_check(&rat(4, 5), &m, 1, side).unwrap();
            assert!((a.gap - b.gap).abs() <= 4.0 / side as f64, "side {side}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn built_measures_are_invariant(num in 0i64..10_000, den in 1i64..=10_000) {
            let m = build_atomic_measure(&rat(num, den), pair()).unwrap();
            for n in [2u64, 3, 6, 4, 9] {
                prop_assert_eq!(&pushforward_times_n(&m, n).unwrap(), &m);
            }
            let total: Ratio<u64> = m.weights().values().copied().sum();
            prop_assert_eq!(total, Ratio::from_integer(1));
        }

        #[test]
        fn moments_are_invariant(num in 0i64..2_000, den in 1i64..=2_000, k in -50i64..50) {
            let m = build_atomic_measure(&rat(num, den), pair()).unwrap();
            prop_assert_eq!(measure_moment(&m, k), measure_moment(&m, 2 * k));
            prop_assert_eq!(measure_moment(&m, k), measure_moment(&m, 3 * k));
        }
    }
}
