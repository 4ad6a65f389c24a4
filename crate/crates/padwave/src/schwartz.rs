//! Bruhat–Schwartz test functions as exact ball partitions.
//!
//! A locally constant compactly supported function is stored as a finite
//! set of pairwise disjoint balls, all at one resolution scale `k` (each
//! ball is `c + p^k Z_p`, of Haar measure `p^-k`), with one complex value
//! per ball. Disjointness is structural: cells are keyed by their canonical
//! center, and two distinct canonical centers at the same scale name
//! disjoint balls.
//!
//! Measures and ball geometry are exact rationals; only the complex cell
//! values are floating point.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::padic::{prime_power_rational, PAdic, Valuation, DEFAULT_REL_DIGITS};

/// `p^k` in floating point.
pub fn prime_power_f64(p: u32, k: i64) -> f64 {
    (p as f64).powi(k as i32)
}

/// `p^(k/2)` in floating point, exact for even `k`.
pub fn prime_power_sqrt_f64(p: u32, k: i64) -> f64 {
    if k % 2 == 0 {
        prime_power_f64(p, k / 2)
    } else {
        prime_power_f64(p, k).sqrt()
    }
}

/// The coset `c + p^k Z_p`, identified by the scale `k` and the canonical
/// center: the digits of `c` below position `k`. Its Haar measure is
/// `p^-k`. Two balls at the same scale are disjoint or identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    prime: u32,
    scale: i64,
    /// Position of the lowest nonzero center digit; irrelevant when
    /// `center_digits` is empty (centered at 0).
    center_valuation: i64,
    /// Center digits from `center_valuation` upward, all positions below
    /// `scale`; first and last entries nonzero.
    center_digits: Vec<u32>,
}

impl Ball {
    /// Canonicalizes `center + p^scale Z_p`: digits of the center at
    /// positions `>= scale` are stripped. The center must be known below
    /// `scale`.
    pub fn new(center: &PAdic, scale: i64) -> Result<Self> {
        let p = center.prime();
        let start = match center.valuation() {
            Ok(Valuation::Infinite) => scale,
            Ok(Valuation::Finite(v)) => v.min(scale),
            Err(e) => {
                // zero to precision: digits below the precision bound are
                // known zeros, which is all we need if it reaches `scale`
                if center.precision().unwrap_or(i64::MAX) >= scale {
                    scale
                } else {
                    return Err(e);
                }
            }
        };
        let mut digits = Vec::with_capacity((scale - start).max(0) as usize);
        for pos in start..scale {
            digits.push(center.digit_at(pos)?);
        }
        Ok(Self::from_raw(p, scale, start, digits))
    }

    fn from_raw(prime: u32, scale: i64, mut valuation: i64, mut digits: Vec<u32>) -> Self {
        while digits.last() == Some(&0) {
            digits.pop();
        }
        let lead = digits.iter().position(|&d| d != 0);
        match lead {
            None => Ball {
                prime,
                scale,
                center_valuation: 0,
                center_digits: Vec::new(),
            },
            Some(shift) => {
                digits.drain(..shift);
                valuation += shift as i64;
                Ball {
                    prime,
                    scale,
                    center_valuation: valuation,
                    center_digits: digits,
                }
            }
        }
    }

    /// `p^scale Z_p`, the ball of radius `p^-scale` around 0.
    pub fn zero_centered(p: u32, scale: i64) -> Self {
        Ball {
            prime: p,
            scale,
            center_valuation: 0,
            center_digits: Vec::new(),
        }
    }

    /// The unit ball `Z_p`.
    pub fn unit(p: u32) -> Self {
        Self::zero_centered(p, 0)
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// Haar measure `p^-scale`, exact.
    pub fn measure(&self) -> BigRational {
        prime_power_rational(self.prime, -self.scale)
    }

    pub fn center_digit_at(&self, pos: i64) -> u32 {
        if self.center_digits.is_empty()
            || pos < self.center_valuation
            || pos >= self.center_valuation + self.center_digits.len() as i64
        {
            0
        } else {
            self.center_digits[(pos - self.center_valuation) as usize]
        }
    }

    /// Lowest position carrying a nonzero center digit, if any.
    pub fn center_valuation(&self) -> Option<i64> {
        if self.center_digits.is_empty() {
            None
        } else {
            Some(self.center_valuation)
        }
    }

    /// The canonical center as an exact p-adic value.
    pub fn center_padic(&self) -> PAdic {
        if self.center_digits.is_empty() {
            PAdic::exact_zero(self.prime).expect("prime validated")
        } else {
            PAdic::from_exact_digits(
                self.prime,
                self.center_valuation,
                self.center_digits.clone(),
            )
            .expect("digits canonical")
        }
    }

    /// The canonical center as an exact rational.
    pub fn center_rational(&self) -> BigRational {
        let mut num = BigInt::zero();
        for &d in self.center_digits.iter().rev() {
            num = num * BigInt::from(self.prime) + BigInt::from(d);
        }
        BigRational::from_integer(num) * prime_power_rational(self.prime, self.center_valuation)
    }

    /// Whether `x` lies in the ball; requires the digits of `x` to be known
    /// below `scale`.
    pub fn contains(&self, x: &PAdic) -> Result<bool> {
        let start = match x.valuation() {
            Ok(Valuation::Finite(v)) => v.min(self.lowest_position()),
            Ok(Valuation::Infinite) => self.lowest_position(),
            Err(e) => {
                if x.precision().unwrap_or(i64::MAX) >= self.scale {
                    self.lowest_position()
                } else {
                    return Err(e);
                }
            }
        };
        for pos in start..self.scale {
            if x.digit_at(pos)? != self.center_digit_at(pos) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn lowest_position(&self) -> i64 {
        if self.center_digits.is_empty() {
            self.scale
        } else {
            self.center_valuation
        }
    }

    /// The `p` children at scale `scale + 1`, ordered by their appended
    /// digit.
    pub fn children(&self) -> Vec<Ball> {
        (0..self.prime)
            .map(|d| {
                let mut digits = Vec::new();
                let valuation = if self.center_digits.is_empty() {
                    if d == 0 {
                        0
                    } else {
                        digits.push(d);
                        self.scale
                    }
                } else {
                    digits = self.center_digits.clone();
                    if d != 0 {
                        let len_needed = (self.scale - self.center_valuation) as usize + 1;
                        digits.resize(len_needed, 0);
                        digits[len_needed - 1] = d;
                    }
                    self.center_valuation
                };
                Ball::from_raw(self.prime, self.scale + 1, valuation, digits)
            })
            .collect()
    }

    /// The ball at scale `scale - 1` containing this one.
    pub fn parent(&self) -> Ball {
        let mut digits = self.center_digits.clone();
        let keep = (self.scale - 1 - self.center_valuation).max(0) as usize;
        digits.truncate(keep.min(digits.len()));
        Ball::from_raw(self.prime, self.scale - 1, self.center_valuation, digits)
    }

    /// Radius exponent `r` of the smallest zero-centered ball
    /// `p^-r Z_p` containing this ball.
    pub fn enclosing_radius_exponent(&self) -> i64 {
        match self.center_valuation() {
            None => -self.scale,
            Some(v) => (-v).max(-self.scale),
        }
    }

    fn cmp_center(&self, other: &Self) -> Ordering {
        let lo = self.lowest_position().min(other.lowest_position());
        let hi = self.scale.max(other.scale);
        for pos in (lo..hi).rev() {
            let c = self.center_digit_at(pos).cmp(&other.center_digit_at(pos));
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    }
}

impl Ord for Ball {
    fn cmp(&self, other: &Self) -> Ordering {
        self.scale
            .cmp(&other.scale)
            .then_with(|| self.cmp_center(other))
    }
}

impl PartialOrd for Ball {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.center_rational();
        if c.is_zero() {
            write!(f, "{}^{} Z_{}", self.prime, self.scale, self.prime)
        } else if c.denom().is_one() {
            write!(
                f,
                "{} + {}^{} Z_{}",
                c.numer(),
                self.prime,
                self.scale,
                self.prime
            )
        } else {
            write!(
                f,
                "{}/{} + {}^{} Z_{}",
                c.numer(),
                c.denom(),
                self.prime,
                self.scale,
                self.prime
            )
        }
    }
}

/// A locally constant compactly supported function: disjoint equal-scale
/// balls with complex values. Zero outside the listed balls; cells whose
/// value is the exact floating zero are pruned.
#[derive(Debug, Clone, PartialEq)]
pub struct SchwartzFunction {
    prime: u32,
    scale: i64,
    cells: BTreeMap<Ball, Complex64>,
}

impl SchwartzFunction {
    pub fn empty(p: u32, scale: i64) -> Self {
        SchwartzFunction {
            prime: p,
            scale,
            cells: BTreeMap::new(),
        }
    }

    /// Builds a function from cells, enforcing the equal-scale and
    /// disjointness invariants.
    pub fn from_cells<I>(p: u32, scale: i64, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Ball, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (ball, value) in cells {
            if ball.prime() != p {
                return Err(Error::PrimeMismatch {
                    left: p,
                    right: ball.prime(),
                });
            }
            if ball.scale() != scale {
                return Err(Error::FunctionFile(format!(
                    "cell {ball} is at scale {}, expected {scale}",
                    ball.scale()
                )));
            }
            if value == Complex64::ZERO {
                continue;
            }
            if let Some(_old) = map.insert(ball.clone(), value) {
                return Err(Error::FunctionFile(format!(
                    "overlapping cells: ball {ball} listed twice"
                )));
            }
        }
        Ok(SchwartzFunction {
            prime: p,
            scale,
            cells: map,
        })
    }

    /// The characteristic function of a ball. `indicator(Z_p)` is the
    /// profile `Omega(|x|_p)` of the unit ball.
    pub fn indicator(ball: &Ball) -> Self {
        let mut cells = BTreeMap::new();
        cells.insert(ball.clone(), Complex64::new(1.0, 0.0));
        SchwartzFunction {
            prime: ball.prime(),
            scale: ball.scale(),
            cells,
        }
    }

    /// `Omega(|x|_p)`: the characteristic function of the unit ball.
    pub fn omega(p: u32) -> Self {
        Self::indicator(&Ball::unit(p))
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    /// The resolution scale: every cell is a ball `c + p^scale Z_p`.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Ball, &Complex64)> {
        self.cells.iter()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn check_same_prime(&self, other: &Self) -> Result<()> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(Error::PrimeMismatch {
                left: self.prime,
                right: other.prime,
            })
        }
    }

    /// Splits every cell into `p^(target-scale)` children carrying the
    /// parent's value; represents the same function.
    pub fn refine_to_scale(&self, target: i64) -> Result<Self> {
        if target < self.scale {
            return Err(Error::CoarserScale {
                requested: target,
                current: self.scale,
            });
        }
        let mut current = self.clone();
        while current.scale < target {
            let mut next = BTreeMap::new();
            for (ball, value) in &current.cells {
                for child in ball.children() {
                    next.insert(child, *value);
                }
            }
            current = SchwartzFunction {
                prime: self.prime,
                scale: current.scale + 1,
                cells: next,
            };
        }
        Ok(current)
    }

    /// Merges complete families of `p` equal-valued sibling cells as far as
    /// possible, producing the coarsest equal-scale representation of the
    /// same function.
    pub fn canonicalize(&self) -> Self {
        let mut current = self.clone();
        loop {
            if current.cells.is_empty() {
                return current;
            }
            let mut parents: BTreeMap<Ball, Vec<Complex64>> = BTreeMap::new();
            for (ball, value) in &current.cells {
                parents.entry(ball.parent()).or_default().push(*value);
            }
            let all_complete = parents.values().all(|vals| {
                vals.len() == current.prime as usize && vals.iter().all(|v| *v == vals[0])
            });
            if !all_complete {
                return current;
            }
            let cells = parents
                .into_iter()
                .map(|(ball, vals)| (ball, vals[0]))
                .collect();
            current = SchwartzFunction {
                prime: current.prime,
                scale: current.scale - 1,
                cells,
            };
        }
    }

    /// The value at `x`: the value of the unique cell containing `x`, else
    /// zero. The digits of `x` must be known below the resolution scale.
    pub fn evaluate(&self, x: &PAdic) -> Result<Complex64> {
        if self.cells.is_empty() {
            return Ok(Complex64::ZERO);
        }
        let key = Ball::new(x, self.scale)?;
        Ok(self.cells.get(&key).copied().unwrap_or(Complex64::ZERO))
    }

    /// Pointwise `alpha f + beta g` at the common refinement; exact zeros
    /// are pruned and complete equal-valued families are merged back.
    pub fn linear_combine(
        alpha: Complex64,
        f: &SchwartzFunction,
        beta: Complex64,
        g: &SchwartzFunction,
    ) -> Result<SchwartzFunction> {
        f.check_same_prime(g)?;
        let scale = f.scale.max(g.scale);
        let f = f.refine_to_scale(scale)?;
        let g = g.refine_to_scale(scale)?;
        let mut cells: BTreeMap<Ball, Complex64> = BTreeMap::new();
        for (ball, value) in &f.cells {
            cells.insert(ball.clone(), alpha * value);
        }
        for (ball, value) in &g.cells {
            *cells.entry(ball.clone()).or_insert(Complex64::ZERO) += beta * value;
        }
        cells.retain(|_, v| *v != Complex64::ZERO);
        let out = SchwartzFunction {
            prime: f.prime,
            scale,
            cells,
        };
        Ok(out.canonicalize())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::linear_combine(Complex64::ONE, self, Complex64::ONE, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combine(Complex64::ONE, self, -Complex64::ONE, other)
    }

    /// Multiplies every cell value by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        if factor == Complex64::ZERO {
            return Self::empty(self.prime, self.scale);
        }
        SchwartzFunction {
            prime: self.prime,
            scale: self.scale,
            cells: self
                .cells
                .iter()
                .map(|(b, v)| (b.clone(), factor * v))
                .collect(),
        }
    }

    /// `integral f dmu = sum value * p^-scale` over the cells.
    pub fn integral(&self) -> Complex64 {
        let mu = prime_power_f64(self.prime, -self.scale);
        self.cells.values().map(|v| v * mu).sum()
    }

    /// `<self, g>`, conjugate-linear in `self`. Computed by iterating the
    /// finer partition and reading the coarser function at each center, so
    /// disjoint supports never force a refinement.
    pub fn inner_product(&self, g: &Self) -> Result<Complex64> {
        self.check_same_prime(g)?;
        if self.cells.is_empty() || g.cells.is_empty() {
            return Ok(Complex64::ZERO);
        }
        if self.scale >= g.scale {
            let mu = prime_power_f64(self.prime, -self.scale);
            let mut acc = Complex64::ZERO;
            for (ball, value) in &self.cells {
                let gv = g.evaluate(&ball.center_padic())?;
                if gv != Complex64::ZERO {
                    acc += value.conj() * gv * mu;
                }
            }
            Ok(acc)
        } else {
            let mu = prime_power_f64(self.prime, -g.scale);
            let mut acc = Complex64::ZERO;
            for (ball, value) in &g.cells {
                let fv = self.evaluate(&ball.center_padic())?;
                if fv != Complex64::ZERO {
                    acc += fv.conj() * value * mu;
                }
            }
            Ok(acc)
        }
    }

    /// `<f, f>`, a nonnegative real.
    pub fn norm_sq(&self) -> f64 {
        let mu = prime_power_f64(self.prime, -self.scale);
        self.cells.values().map(|v| v.norm_sqr() * mu).sum()
    }

    /// Image under the affine action
    /// `G(a,b) f (x) = |a|_p^{-1/2} f((x-b)/a)`: each cell `B` maps to
    /// `aB + b` (the scale shifts by the valuation of `a`) and values pick
    /// up the unitary normalization `|a|_p^{-1/2}`.
    pub fn affine_image(&self, a: &PAdic, b: &PAdic) -> Result<Self> {
        if a.prime() != self.prime || b.prime() != self.prime {
            return Err(Error::PrimeMismatch {
                left: self.prime,
                right: if a.prime() != self.prime {
                    a.prime()
                } else {
                    b.prime()
                },
            });
        }
        let va = match a.valuation()? {
            Valuation::Infinite => return Err(Error::DivisionByZero),
            Valuation::Finite(v) => v,
        };
        let scale = self.scale + va;
        // |a|_p^{-1/2} = p^(va/2)
        let amplitude = prime_power_sqrt_f64(self.prime, va);
        let mut cells = BTreeMap::new();
        for (ball, value) in &self.cells {
            let center = a.mul(&ball.center_padic())?.add(b)?;
            let image = Ball::new(&center, scale)?;
            cells.insert(image, value * amplitude);
        }
        debug_assert_eq!(cells.len(), self.cells.len(), "affine images collide");
        Ok(SchwartzFunction {
            prime: self.prime,
            scale,
            cells,
        })
    }

    /// Radius exponent `R` of the smallest zero-centered ball `p^-R Z_p`
    /// containing the support; `None` for the zero function.
    pub fn support_radius_exponent(&self) -> Option<i64> {
        self.cells
            .keys()
            .map(|b| b.enclosing_radius_exponent())
            .max()
    }

    /// Largest absolute value of `f - g` over a common refinement.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff.cells.values().map(|v| v.norm()).fold(0.0, f64::max))
    }
}

/// On-disk JSON form of a [`SchwartzFunction`]:
/// `{ "p": 2, "scale": 0, "cells": [{"center": "5/4", "value": [1.0, 0.0]}] }`.
/// Centers are p-adic literals; loaders reject overlapping cells and
/// non-finite values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionFile {
    pub p: u32,
    pub scale: i64,
    pub cells: Vec<FunctionFileCell>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionFileCell {
    pub center: String,
    pub value: [f64; 2],
}

impl SchwartzFunction {
    pub fn to_file(&self) -> FunctionFile {
        FunctionFile {
            p: self.prime,
            scale: self.scale,
            cells: self
                .cells
                .iter()
                .map(|(ball, value)| FunctionFileCell {
                    center: ball.center_padic().to_literal(),
                    value: [value.re, value.im],
                })
                .collect(),
        }
    }

    pub fn from_file(file: &FunctionFile) -> Result<Self> {
        if !crate::padic::is_prime(file.p) {
            return Err(Error::NotPrime(file.p));
        }
        if file.scale.unsigned_abs() > 1 << 32 {
            return Err(Error::FunctionFile(format!(
                "scale {} outside the supported range",
                file.scale
            )));
        }
        let mut cells = Vec::with_capacity(file.cells.len());
        for cell in &file.cells {
            if !cell.value[0].is_finite() || !cell.value[1].is_finite() {
                return Err(Error::FunctionFile(format!(
                    "cell {:?} has a non-finite value",
                    cell.center
                )));
            }
            let center = parse_center(&cell.center, file.p, file.scale)?;
            let ball = Ball::new(&center, file.scale)?;
            cells.push((ball, Complex64::new(cell.value[0], cell.value[1])));
        }
        Self::from_cells(file.p, file.scale, cells)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FunctionFile = serde_json::from_str(text)
            .map_err(|e| Error::FunctionFile(format!("invalid JSON: {e}")))?;
        Self::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }
}

/// Parses a cell center, widening the digit window when the literal's
/// expansion does not reach the requested scale.
fn parse_center(literal: &str, p: u32, scale: i64) -> Result<PAdic> {
    let first = PAdic::parse(literal, p, DEFAULT_REL_DIGITS)?;
    if first.precision().unwrap_or(i64::MAX) >= scale {
        return Ok(first);
    }
    let v = first.valuation()?.finite().unwrap_or(0);
    let needed = (scale - v).max(1) + 4;
    if needed > 1 << 16 {
        return Err(Error::FunctionFile(format!(
            "cell {literal:?} would need {needed} digits to reach scale {scale}"
        )));
    }
    PAdic::parse(literal, p, needed as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str, p: u32) -> PAdic {
        PAdic::parse(text, p, 32).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ball_canonicalization() {
        // 5/4 + Z_2 = 1/4 + Z_2: the integer digit is stripped
        let b = Ball::new(&parse("5/4", 2), 0).unwrap();
        assert_eq!(
            b.center_rational(),
            BigRational::new(BigInt::from(1), BigInt::from(4))
        );
        assert_eq!(b.measure(), BigRational::one());

        let unit = Ball::new(&PAdic::exact_zero(2).unwrap(), 0).unwrap();
        assert_eq!(unit, Ball::unit(2));
        assert_eq!(unit.measure(), BigRational::one());

        // 1/2 lies in 2^-1 Z_2, so the canonical center is 0 and measure 2
        let b = Ball::new(&parse("1/2", 2), -1).unwrap();
        assert_eq!(b, Ball::zero_centered(2, -1));
        assert_eq!(b.measure(), BigRational::from_integer(BigInt::from(2)));
    }

    #[test]
    fn ball_children_partition_measure() {
        for p in [2u32, 3, 5] {
            let b = Ball::new(&parse("7/4", p).shifted(1), -1).unwrap();
            let total: BigRational = b.children().iter().map(|ch| ch.measure()).sum();
            assert_eq!(total, b.measure());
            for ch in b.children() {
                assert_eq!(ch.parent(), b);
            }
        }
    }

    #[test]
    fn indicator_evaluates_omega() {
        let omega = SchwartzFunction::omega(3);
        assert_eq!(omega.evaluate(&parse("7", 3)).unwrap(), c(1.0, 0.0));
        assert_eq!(omega.evaluate(&parse("-2", 3)).unwrap(), c(1.0, 0.0));
        assert_eq!(omega.evaluate(&parse("1/3", 3)).unwrap(), c(0.0, 0.0));
        assert_eq!(omega.integral(), c(1.0, 0.0));

        let omega2 = SchwartzFunction::omega(2);
        assert_eq!(
            omega2.evaluate(&PAdic::exact_zero(2).unwrap()).unwrap(),
            c(1.0, 0.0)
        );
        assert_eq!(omega2.evaluate(&parse("1/2", 2)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn refine_splits_into_children() {
        let omega = SchwartzFunction::omega(2);
        let fine = omega.refine_to_scale(1).unwrap();
        assert_eq!(fine.num_cells(), 2);
        for (_, v) in fine.cells() {
            assert_eq!(*v, c(1.0, 0.0));
        }
        assert_eq!(omega.refine_to_scale(0).unwrap(), omega);
        assert!(omega.refine_to_scale(-1).is_err());
        assert_eq!(fine.canonicalize(), omega);
    }

    #[test]
    fn refinement_preserves_evaluation() {
        use rand::SeedableRng;
        let omega = SchwartzFunction::omega(5);
        let fine = omega.refine_to_scale(3).unwrap();
        for text in ["0", "4", "1/5", "23", "-3", "7/5"] {
            let x = parse(text, 5);
            assert_eq!(omega.evaluate(&x).unwrap(), fine.evaluate(&x).unwrap());
        }
        // 100 random points straddling the support, exact agreement
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for x in crate::sampling::sample_points_around(&mut rng, &Ball::unit(5), 100) {
            assert_eq!(omega.evaluate(&x).unwrap(), fine.evaluate(&x).unwrap());
        }
    }

    /// Quadrature oracle: the inner product summed over the full common
    /// refinement, cell by cell.
    fn brute_inner_product(f: &SchwartzFunction, g: &SchwartzFunction) -> Complex64 {
        let scale = f.scale().max(g.scale());
        let f = f.refine_to_scale(scale).unwrap();
        let g = g.refine_to_scale(scale).unwrap();
        let mu = prime_power_f64(f.prime(), -scale);
        let mut acc = Complex64::ZERO;
        for (ball, fv) in f.cells() {
            if let Some(gv) = g.cells.get(ball) {
                acc += fv.conj() * gv * mu;
            }
        }
        acc
    }

    #[test]
    fn inner_product_matches_full_refinement() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for p in [2u32, 3, 5] {
            for _ in 0..60 {
                let f = crate::sampling::random_schwartz(&mut rng, p, -2, 2, 10);
                let g = crate::sampling::random_schwartz(&mut rng, p, -2, 2, 10);
                let fast = f.inner_product(&g).unwrap();
                let slow = brute_inner_product(&f, &g);
                assert!((fast - slow).norm() < 1e-13, "p={p}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn insufficient_precision_is_reported() {
        // 1/3 is known mod 2^12 only; a ball at scale 20 needs more digits
        let center = PAdic::parse("1/3", 2, 12).unwrap();
        assert!(matches!(
            Ball::new(&center, 20),
            Err(Error::InsufficientPrecision { .. })
        ));
        let f = SchwartzFunction::indicator(&Ball::zero_centered(2, 20));
        assert!(f.evaluate(&center).is_err());
    }

    #[test]
    fn combine_cancels_and_merges() {
        let omega = SchwartzFunction::omega(2);
        let zero =
            SchwartzFunction::linear_combine(c(1.0, 0.0), &omega, c(-1.0, 0.0), &omega).unwrap();
        assert!(zero.is_empty());

        let even = SchwartzFunction::indicator(&Ball::zero_centered(2, 1));
        let odd = SchwartzFunction::indicator(&Ball::new(&parse("1", 2), 1).unwrap());
        let sum = even.add(&odd).unwrap();
        assert_eq!(sum, omega);
    }

    #[test]
    fn inner_product_is_the_measure_on_omega() {
        for p in [2u32, 3, 5] {
            let omega = SchwartzFunction::omega(p);
            let ip = omega.inner_product(&omega).unwrap();
            assert_eq!(ip, c(1.0, 0.0));
        }
    }

    #[test]
    fn inner_product_conjugate_linear_in_first_argument() {
        let omega = SchwartzFunction::omega(3);
        let f = omega.scaled(c(0.0, 2.0));
        let lhs = f.inner_product(&omega).unwrap();
        assert!((lhs - c(0.0, -2.0)).norm() < 1e-15);
        let rhs = omega.inner_product(&f).unwrap();
        assert!((rhs - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn affine_action_on_omega() {
        for p in [2u32, 3, 5] {
            let omega = SchwartzFunction::omega(p);
            // dilation by p: p^(1/2) * indicator(p Z_p)
            let img = omega
                .affine_image(&parse("1", p).shifted(1), &PAdic::exact_zero(p).unwrap())
                .unwrap();
            assert_eq!(img.num_cells(), 1);
            let (ball, value) = img.cells().next().unwrap();
            assert_eq!(*ball, Ball::zero_centered(p, 1));
            assert!((value.re - (p as f64).sqrt()).abs() < 1e-15);

            // translation by an integer leaves Omega unchanged
            let img = omega.affine_image(&parse("1", p), &parse("7", p)).unwrap();
            assert_eq!(img, omega);
        }
    }

    #[test]
    fn function_file_roundtrip_and_validation() {
        let omega = SchwartzFunction::omega(2);
        let f = SchwartzFunction::linear_combine(
            c(0.5, -1.0),
            &omega,
            c(2.0, 0.0),
            &SchwartzFunction::indicator(&Ball::new(&parse("1/2", 2), 0).unwrap()),
        )
        .unwrap();
        let back = SchwartzFunction::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);

        let dup = r#"{ "p": 2, "scale": 0, "cells": [
            {"center": "5/4", "value": [1.0, 0.0]},
            {"center": "1/4", "value": [2.0, 0.0]}
        ]}"#;
        assert!(matches!(
            SchwartzFunction::from_json(dup),
            Err(Error::FunctionFile(_))
        ));

        let nan = r#"{ "p": 2, "scale": 0, "cells": [{"center": "0", "value": [null, 0.0]}]}"#;
        assert!(SchwartzFunction::from_json(nan).is_err());

        let notprime = r#"{ "p": 6, "scale": 0, "cells": []}"#;
        assert!(matches!(
            SchwartzFunction::from_json(notprime),
            Err(Error::NotPrime(6))
        ));
    }

    fn arb_function(p: u32) -> impl Strategy<Value = SchwartzFunction> {
        let scale = -2i64..3;
        (
            scale,
            prop::collection::vec((0u64..200, -4i64..4, -3.0f64..3.0, -3.0f64..3.0), 1..8),
        )
            .prop_map(move |(scale, raw)| {
                let mut cells: BTreeMap<Ball, Complex64> = BTreeMap::new();
                for (idx, shift, re, im) in raw {
                    let center = crate::padic::CosetRep::from_index(p, idx)
                        .to_padic()
                        .shifted(shift);
                    let ball = Ball::new(&center, scale).unwrap();
                    let v = c(re, im);
                    if v != Complex64::ZERO {
                        cells.insert(ball, v);
                    }
                }
                SchwartzFunction {
                    prime: p,
                    scale,
                    cells,
                }
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn integral_is_invariant_under_refinement(f in arb_function(3), extra in 1i64..3) {
            let fine = f.refine_to_scale(f.scale() + extra).unwrap();
            let a = f.integral();
            let b = fine.integral();
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn affine_action_is_unitary(
            f in arb_function(3),
            g in arb_function(3),
            va in -3i64..3,
            lead in 1u32..3,
            bidx in 0u64..50,
            bshift in -3i64..3,
        ) {
            let a = PAdic::from_exact_digits(3, va, vec![lead, 2, 1]).unwrap();
            let b = crate::padic::CosetRep::from_index(3, bidx).to_padic().shifted(bshift);
            let fa = f.affine_image(&a, &b).unwrap();
            let ga = g.affine_image(&a, &b).unwrap();
            let before = f.inner_product(&g).unwrap();
            let after = fa.inner_product(&ga).unwrap();
            prop_assert!((before - after).norm() <= 1e-12 * (1.0 + before.norm()));
        }

        #[test]
        fn norm_positive_definite(f in arb_function(2)) {
            let n = f.norm_sq();
            prop_assert!(n >= 0.0);
            prop_assert_eq!(n == 0.0, f.is_empty());
        }

        #[test]
        fn measure_additivity_exact(scale in -5i64..5, idx in 0u64..100, shift in -3i64..3) {
            for p in [2u32, 3, 5] {
                let center = crate::padic::CosetRep::from_index(p, idx).to_padic().shifted(shift);
                let ball = Ball::new(&center, scale).unwrap();
                let total: BigRational = ball.children().iter().map(|c| c.measure()).sum();
                prop_assert_eq!(total, ball.measure());
            }
        }
    }
}
