//! Scratch diagnostics for solver tuning (not part of the deliverable API).
use interlat::interp::*;
use interlat::lattice::LatticeNorm;
use interlat::spaces::{EpsParams, Field, Space};
use interlat::C64;
use std::sync::Arc;

fn main() {
    let l1 = Space::from_lattice(Arc::new(LatticeNorm::lp(2, 1.0).unwrap()), Field::Complex);
    let linf = Space::from_lattice(
        Arc::new(LatticeNorm::lp(2, f64::INFINITY).unwrap()),
        Field::Complex,
    );
    let c = Couple::new(l1, linf).unwrap();
    let x = vec![C64::new(1.0, 0.0), C64::new(0.3, 0.0)];
    let oracle = (1.0f64 + 0.09).sqrt();
    for (deg, grid, restarts, iters) in [
        (6usize, 64usize, 2usize, 30usize),
        (8, 128, 2, 30),
        (8, 128, 6, 40),
        (8, 128, 6, 80),
        (12, 128, 6, 80),
        (8, 256, 6, 80),
    ] {
        let p = SolverParams {
            degree: deg,
            grid,
            opt_grid: 32,
            restarts,
            iters,
            seed: 3,
            witness_candidates: 5,
            eps: EpsParams::with_seed(3),
            ..Default::default()
        };
        let t0 = std::time::Instant::now();
        let (up, cand, _) = interp_upper(&c, &x, 0.5, &p);
        let (lo, _, _) = interp_lower(&c, &x, 0.5, &p);
        println!(
            "deg {deg:>2} grid {grid:>3} restarts {restarts} iters {iters:>3}: up {:.6} (excess {:+.3}%)  lo {:.6} (deficit {:+.3}%)  width {:.2}%  corr-part {:.4}  [{:?}]",
            up,
            (up / oracle - 1.0) * 100.0,
            lo,
            (lo / oracle - 1.0) * 100.0,
            (up - lo) / up * 100.0,
            candidate_value(&c, &cand),
            t0.elapsed()
        );
    }
}
