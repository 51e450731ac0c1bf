//! Brute-force reference values that share no code with the library: the
//! box levels `n²π²/(2w²)` (natural units) summed directly until the terms
//! stop contributing.

#![allow(dead_code)]

use std::f64::consts::PI;

pub const E1: f64 = PI * PI / 2.0;

/// Levels of a width-`w` box whose Boltzmann weight relative to the ground
/// level exceeds `1e-300`.
pub fn ladder(width: f64, beta: f64) -> Vec<f64> {
    let base = PI * PI / (2.0 * width * width);
    let mut out = Vec::new();
    let mut n = 1u64;
    loop {
        let e = base * (n * n) as f64;
        if n > 1 && beta * (e - base) > 690.0 {
            break;
        }
        out.push(e);
        n += 1;
    }
    out
}

/// Canonical moments of a list of levels (degeneracies as repeats).
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub ln_z: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn moments(levels: &[f64], beta: f64) -> Moments {
    let e0 = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut s0, mut s1) = (0.0, 0.0);
    for &e in levels {
        let w = (-beta * (e - e0)).exp();
        s0 += w;
        s1 += w * (e - e0);
    }
    let shifted_mean = s1 / s0;
    let mut s2 = 0.0;
    for &e in levels {
        let w = (-beta * (e - e0)).exp();
        s2 += w * (e - e0 - shifted_mean).powi(2);
    }
    Moments {
        ln_z: s0.ln() - beta * e0,
        mean: e0 + shifted_mean,
        variance: s2 / s0,
    }
}

pub fn box_moments(width: f64, beta: f64) -> Moments {
    moments(&ladder(width, beta), beta)
}

/// Box of length 1 split at `x` into two independent ladders.
pub fn split_moments(x: f64, beta: f64) -> Moments {
    let mut levels = ladder(x, beta);
    levels.extend(ladder(1.0 - x, beta));
    moments(&levels, beta)
}

pub fn entropy(m: &Moments, beta: f64) -> f64 {
    m.ln_z + beta * m.mean
}

pub fn free_energy(m: &Moments, beta: f64) -> f64 {
    -m.ln_z / beta
}

/// Probability that a particle in the split box is left of the wall.
pub fn left_probability(x: f64, beta: f64) -> f64 {
    let a = box_moments(x, beta).ln_z;
    let b = box_moments(1.0 - x, beta).ln_z;
    1.0 / (1.0 + (b - a).exp())
}

pub fn binary_entropy(p: f64) -> f64 {
    let h = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    h(p) + h(1.0 - p)
}
