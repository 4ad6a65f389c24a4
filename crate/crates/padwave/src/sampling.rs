//! Deterministic seeded generators for test values.
//!
//! The verification suites draw their cases from these helpers with a
//! caller-supplied RNG; the same seed always produces the same cases, which
//! keeps suite reports byte-identical run to run.

use num_complex::Complex64;
use rand::Rng;

use crate::padic::{CosetRep, PAdic};
use crate::schwartz::{Ball, SchwartzFunction};
use crate::wavelets::AffineParams;

/// A random exact value with digits drawn at positions `[min_pos, max_pos)`;
/// may come out zero.
pub fn random_exact<R: Rng>(rng: &mut R, p: u32, min_pos: i64, max_pos: i64) -> PAdic {
    let width = (max_pos - min_pos).max(0) as usize;
    let digits: Vec<u32> = (0..width).map(|_| rng.random_range(0..p)).collect();
    PAdic::from_exact_digits(p, min_pos, digits).expect("digits below p")
}

/// A random exact unit (leading digit nonzero at position 0) with `digits`
/// stored digits.
pub fn random_unit<R: Rng>(rng: &mut R, p: u32, digits: usize) -> PAdic {
    let mut ds = vec![rng.random_range(1..p)];
    for _ in 1..digits.max(1) {
        ds.push(rng.random_range(0..p));
    }
    PAdic::from_exact_digits(p, 0, ds).expect("digits below p")
}

/// Random translation/dilation parameters: `a` has valuation uniform in
/// `[-max_valuation, max_valuation]` and uniform unit digits; `b` has digits
/// spread over `[-max_valuation - 2, max_valuation + 2)` and is zero in
/// roughly one case out of eight.
pub fn random_affine_params<R: Rng>(rng: &mut R, p: u32, max_valuation: i64) -> AffineParams {
    let va = rng.random_range(-max_valuation..=max_valuation);
    let a = random_unit(rng, p, 8).shifted(va);
    let b = if rng.random_range(0..8u32) == 0 {
        PAdic::exact_zero(p).expect("prime")
    } else {
        random_exact(rng, p, -max_valuation - 2, max_valuation + 2)
    };
    AffineParams::new(a, b).expect("a is a nonzero unit shift")
}

/// A random coset of `Z_p` with at most `max_depth` fractional digits.
pub fn random_coset<R: Rng>(rng: &mut R, p: u32, max_depth: u32) -> CosetRep {
    let bound = (p as u64).pow(max_depth);
    CosetRep::from_index(p, rng.random_range(0..bound))
}

/// A random cell function: up to `max_cells` cells at one scale drawn from
/// `[scale_min, scale_max]`, complex values in the unit square.
pub fn random_schwartz<R: Rng>(
    rng: &mut R,
    p: u32,
    scale_min: i64,
    scale_max: i64,
    max_cells: usize,
) -> SchwartzFunction {
    let scale = rng.random_range(scale_min..=scale_max);
    let cells = rng.random_range(1..=max_cells);
    let mut out = Vec::with_capacity(cells);
    for _ in 0..cells {
        let center = random_exact(rng, p, scale - 4, scale);
        let ball = Ball::new(&center, scale).expect("exact center");
        let value = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        out.push((ball, value));
    }
    // later duplicates overwrite earlier cells; build through a map
    let mut map = std::collections::BTreeMap::new();
    for (ball, value) in out {
        map.insert(ball, value);
    }
    SchwartzFunction::from_cells(p, scale, map).expect("cells disjoint")
}

/// Sample points straddling a ball: refinements of each point inside,
/// plus points pushed outside by perturbing a digit below the ball scale.
pub fn sample_points_around<R: Rng>(rng: &mut R, ball: &Ball, count: usize) -> Vec<PAdic> {
    let p = ball.prime();
    let scale = ball.scale();
    let center = ball.center_padic();
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let inside = random_exact(rng, p, scale, scale + 8);
        let x = center.add(&inside).expect("same prime");
        if i % 3 == 2 {
            // push outside: a nonzero digit strictly below the ball scale
            let t = rng.random_range(1..=3i64);
            let d = rng.random_range(1..p);
            let bump = PAdic::from_exact_digits(p, scale - t, vec![d]).expect("digit below p");
            points.push(x.add(&bump).expect("same prime"));
        } else {
            points.push(x);
        }
    }
    points
}
