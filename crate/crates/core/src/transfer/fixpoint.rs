use rayon::prelude::*;

use super::func::{node, GridFunction};
use crate::{Error, Result};

/// How the two operators are combined in one step of [`fixpoint_search`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SearchMode {
    /// `f ← P((T_p f + T_q f) / 2)`.
    #[default]
    Mean,
    /// `f ← P(T_p P(T_q f))`.
    Alternate,
}

/// Per-iterate record of a [`fixpoint_search`] run. Index 0 is the start.
#[derive(Clone, Debug, PartialEq)]
pub struct FixpointTrace {
    /// `max(‖T_p f - f‖, ‖T_q f - f‖)` on the grid.
    pub residuals: Vec<f64>,
    /// `max_t |f(t/K) - t/K|`.
    pub distances: Vec<f64>,
    /// Largest jump between neighbouring samples, the scale of the error
    /// linear interpolation adds to each residual.
    pub interpolation_errors: Vec<f64>,
    /// Whether each iterate was nondecreasing and anchored.
    pub feasible: Vec<bool>,
    pub final_f: GridFunction,
    /// The last residual reached the tolerance.
    pub converged: bool,
}

/// Least-squares nondecreasing fit by pool-adjacent-violators, then affine
/// renormalization to `f(0) = 0`, `f(1) = 1`.
pub fn isotonic_project(f: &GridFunction) -> Result<GridFunction> {
    anchor(pool_adjacent_violators(f.samples()))
}

fn pool_adjacent_violators(y: &[f64]) -> Vec<f64> {
    // (sum, count) per block; block means are nondecreasing on the stack.
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        let mut cur = (v, 1usize);
        while let Some(&(sum, count)) = blocks.last() {
            if sum / count as f64 > cur.0 / cur.1 as f64 {
                blocks.pop();
                cur = (sum + cur.0, count + cur.1);
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(y.len());
    for (sum, count) in blocks {
        let mean = sum / count as f64;
        out.extend(std::iter::repeat_n(mean, count));
    }
    out
}

fn anchor(mut v: Vec<f64>) -> Result<GridFunction> {
    let last = v.len() - 1;
    let (lo, hi) = (v[0], v[last]);
    if hi <= lo || hi.is_nan() || lo.is_nan() {
        return Err(Error::FlatSamples);
    }
    if lo != 0.0 || hi != 1.0 {
        let span = hi - lo;
        for x in v.iter_mut() {
            *x = (*x - lo) / span;
        }
        v[0] = 0.0;
        v[last] = 1.0;
    }
    GridFunction::new(v)
}

/// `g_t = f(t/K) - t/K`.
fn deviation(f: &GridFunction) -> Vec<f64> {
    let k = f.grid_size();
    f.samples()
        .iter()
        .enumerate()
        .map(|(t, v)| v - node(t, k))
        .collect()
}

/// `T_n` of the linear interpolant of `g`, at the grid nodes.
///
/// The point `(t/K + j)/n` sits at grid index `(t + jK)/n`; with `n | K`
/// the subtracted values `g(j/n)` are grid samples.
fn transfer_deviation(g: &[f64], n: usize) -> Vec<f64> {
    let k = g.len() - 1;
    let nf = n as f64;
    (0..=k)
        .into_par_iter()
        .map(|t| {
            let mut acc = 0.0;
            for j in 0..n {
                let pos = t + j * k;
                let (i, rem) = (pos / n, pos % n);
                let v = if rem == 0 {
                    g[i]
                } else {
                    g[i] + (rem as f64 / nf) * (g[i + 1] - g[i])
                };
                acc += v - g[j * k / n];
            }
            acc
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Samples `t/K + h_t`.
fn from_deviation(h: &[f64]) -> Result<GridFunction> {
    let k = h.len() - 1;
    GridFunction::new(h.iter().enumerate().map(|(t, v)| node(t, k) + v).collect())
}

/// Searches for a common monotone fixed point of `T_p` and `T_q` by
/// iterating `f ← P((T_p f + T_q f)/2)` (or the alternating form), where
/// `P` is [`isotonic_project`] and `T_n` acts on the piecewise-linear
/// interpolant of the current samples.
///
/// Internally the iterate is kept as its deviation from the identity.
/// Since `T_n x = x`, the identity is then reproduced with exactly zero
/// residual.
pub fn fixpoint_search(
    f0: &GridFunction,
    p: u64,
    q: u64,
    iters: usize,
    tol: f64,
    mode: SearchMode,
) -> Result<FixpointTrace> {
    for n in [p, q] {
        if n < 2 {
            return Err(Error::OperatorIndex(n));
        }
    }
    if !(f0.is_monotone() && f0.is_anchored()) {
        return Err(Error::InfeasibleStart);
    }
    let k = f0.grid_size();
    let pq = p * q;
    if !(k as u64).is_multiple_of(pq) {
        return Err(Error::GridNotCommensurate { k, pq });
    }
    let (p, q) = (p as usize, q as usize);

    let mut trace = FixpointTrace {
        residuals: Vec::new(),
        distances: Vec::new(),
        interpolation_errors: Vec::new(),
        feasible: Vec::new(),
        final_f: f0.clone(),
        converged: false,
    };
    let mut f = f0.clone();
    for it in 0..=iters {
        let g = deviation(&f);
        let tp = transfer_deviation(&g, p);
        let tq = transfer_deviation(&g, q);
        let residual = max_abs_diff(&tp, &g).max(max_abs_diff(&tq, &g));
        trace.residuals.push(residual);
        trace
            .distances
            .push(g.iter().map(|v| v.abs()).fold(0.0, f64::max));
        trace.interpolation_errors.push(
            f.samples()
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(0.0, f64::max),
        );
        let feasible = f.is_monotone() && f.is_anchored();
        debug_assert!(feasible, "iterate {it} left the feasible set");
        trace.feasible.push(feasible);
        if residual <= tol {
            trace.converged = true;
            break;
        }
        if it == iters {
            break;
        }
        f = match mode {
            SearchMode::Mean => {
                let mean: Vec<f64> = tp.iter().zip(&tq).map(|(a, b)| 0.5 * (a + b)).collect();
                isotonic_project(&from_deviation(&mean)?)?
            }
            SearchMode::Alternate => {
                let half = isotonic_project(&from_deviation(&tq)?)?;
                let next = transfer_deviation(&deviation(&half), p);
                isotonic_project(&from_deviation(&next)?)?
            }
        };
    }
    trace.final_f = f;
    Ok(trace)
}
