//! Derivative-free minimization helpers shared by the norm searches:
//! golden-section line search and coordinate descent with optional
//! random-direction polish passes.

use rand_chacha::ChaCha8Rng;

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub(crate) fn golden_min(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

pub(crate) struct DescentOpts {
    pub span: f64,
    pub sweeps: usize,
    pub line_iters: usize,
    /// Random search directions tried after the coordinate sweeps. Helps on
    /// max-type objectives where coordinate moves stall on a kink.
    pub dir_polish: usize,
    pub tol: f64,
}

impl Default for DescentOpts {
    fn default() -> Self {
        DescentOpts {
            span: 4.0,
            sweeps: 40,
            line_iters: 28,
            dir_polish: 12,
            tol: 1e-12,
        }
    }
}

/// Coordinate descent from `x0`, alternating coordinate sweeps with
/// random-direction line searches so that ridge minima of max-type
/// objectives can still be followed. Returns `(argmin, value, converged)`.
/// Deterministic given the generator state.
pub(crate) fn coord_descent_min<F>(
    f: F,
    x0: Vec<f64>,
    opts: &DescentOpts,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64, bool)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut best = f(&x);
    let mut converged = false;
    let rounds = 4usize;
    let sweeps_per_round = opts.sweeps.div_ceil(rounds).max(2);
    for round in 0..rounds {
        let round_start = best;
        let mut span = opts.span;
        for _ in 0..sweeps_per_round {
            let before = best;
            for i in 0..n {
                let xi = x[i];
                let mut probe = |t: f64| {
                    let mut y = x.clone();
                    y[i] = t;
                    f(&y)
                };
                let (t, v) = golden_min(&mut probe, xi - span, xi + span, opts.line_iters);
                if v < best {
                    best = v;
                    x[i] = t;
                }
            }
            if before - best < opts.tol * (1.0 + best.abs()) {
                if span <= opts.span / 64.0 {
                    break;
                }
                span /= 4.0;
            }
        }
        if n > 1 {
            for _ in 0..opts.dir_polish {
                let d: Vec<f64> = (0..n).map(|_| crate::rng::normal(rng)).collect();
                let scale = (d.iter().map(|v| v * v).sum::<f64>()).sqrt().max(1e-12);
                let mut probe = |t: f64| {
                    let y: Vec<f64> = x
                        .iter()
                        .zip(d.iter())
                        .map(|(xi, di)| xi + t * di / scale)
                        .collect();
                    f(&y)
                };
                let (t, v) = golden_min(&mut probe, -opts.span, opts.span, opts.line_iters);
                if v < best - 1e-15 {
                    best = v;
                    for (xi, di) in x.iter_mut().zip(d.iter()) {
                        *xi += t * di / scale;
                    }
                }
            }
        }
        let gained = round_start - best;
        if gained < opts.tol * (1.0 + best.abs()) {
            converged = true;
            break;
        }
        if round + 1 == rounds {
            converged = gained < 1e-9 * (1.0 + best.abs());
        }
    }
    (x, best, converged)
}
