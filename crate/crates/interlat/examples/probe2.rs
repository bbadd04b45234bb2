//! Scratch timing probe for the tensor-couple solver path.
use interlat::interp::*;
use interlat::lattice::LatticeNorm;
use interlat::rng::{gaussian_cvec, rng_for};
use interlat::spaces::{injective_norm, EpsParams, Field, Space};
use interlat::C64;
use nalgebra::DMatrix;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let lat = |d: usize, p: f64| Arc::new(LatticeNorm::lp(d, p).unwrap());
    let a0 = Space::from_lattice(lat(2, 1.0), Field::Complex);
    let a1 = Space::from_lattice(lat(2, 2.0), Field::Complex);
    let b0 = Space::from_lattice(lat(2, 1.0), Field::Complex);
    let b1 = Space::from_lattice(lat(2, 2.0), Field::Complex);
    let endpoint = Couple::new(
        Space::eps_tensor(a0.clone(), b0.clone()),
        Space::eps_tensor(a1.clone(), b1.clone()),
    )
    .unwrap();
    let fa = Couple::new(a0, a1).unwrap();
    let fb = Couple::new(b0, b1).unwrap();
    let theta = 0.5;
    let at = fa.product_space(theta).unwrap();
    let bt = fb.product_space(theta).unwrap();
    let p = SolverParams::with_seed(3);
    let mut rng = rng_for(1, &[]);
    let u = gaussian_cvec(&mut rng, 4);
    let z = DMatrix::from_fn(2, 2, |i, j| u[i * 2 + j]);
    let flat: Vec<C64> = u.clone();

    let t0 = Instant::now();
    let (up, _, _) = interp_upper(&endpoint, &flat, theta, &p);
    println!("interp_upper: {:?}  value {:.4}", t0.elapsed(), up);

    let t0 = Instant::now();
    let (lo, _, _) = interp_lower(&endpoint, &flat, theta, &p);
    println!("interp_lower: {:?}  value {:.4}", t0.elapsed(), lo);

    let t0 = Instant::now();
    let eps = injective_norm(&z, &at, &bt, &EpsParams::with_seed(3));
    println!(
        "eps_theta: {:?}  [{:.4}, {:.4}]",
        t0.elapsed(),
        eps.lower,
        eps.upper
    );

    // contraction sample timing
    let m = Couple::new(
        Space::from_lattice(lat(2, 1.0), Field::Complex),
        Space::from_lattice(lat(2, 2.0), Field::Complex),
    )
    .unwrap();
    let t0 = Instant::now();
    let s = contraction_check(&m, &m, theta, &z, &p).unwrap();
    println!(
        "contraction: {:?}  lhs {:.4} rhs {:.4}",
        t0.elapsed(),
        s.lhs_lower,
        s.rhs_upper
    );
}
