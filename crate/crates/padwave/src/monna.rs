//! The digit-reversal change of variable between `Q_p` and the half-line.
//!
//! `rho: sum x_i p^i -> sum x_i p^(-i-1)` maps finite p-adic expansions onto
//! the nonnegative rationals with p-power denominators. It conserves the
//! Haar measure (a ball of measure `p^-k` maps onto an interval of length
//! `p^-k`), satisfies `|rho(x) - rho(y)| <= |x - y|_p`, and for p = 2 sends
//! the wavelet basis onto the Haar basis of the half-line.
//!
//! The map is restricted to finite expansions: values whose digit windows
//! do not terminate (negative rationals, units with infinite expansions) are
//! rejected instead of rounded, which keeps every identity here exact and
//! sidesteps the measure-zero set where digit reversal fails to be
//! injective.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::padic::{prime_power_rational, CosetRep, PAdic};
use crate::schwartz::{prime_power_sqrt_f64, Ball};
use crate::wavelets::{basis_wavelet, WaveletIndex};

/// A half-open interval `[left, left + length)` on the half-line. Images of
/// balls have `length` equal to the ball measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealInterval {
    pub left: BigRational,
    pub length: BigRational,
}

impl RealInterval {
    pub fn right(&self) -> BigRational {
        &self.left + &self.length
    }

    pub fn contains(&self, t: &BigRational) -> bool {
        *t >= self.left && *t < self.right()
    }
}

impl std::fmt::Display for RealInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {})", self.left, self.right())
    }
}

/// The digit reversal `rho(x) = sum x_i p^(-i-1)`, exact on finite
/// expansions; infinite expansions are rejected.
pub fn monna_map(x: &PAdic) -> Result<BigRational> {
    if !x.is_exact() {
        return Err(Error::InfiniteExpansion);
    }
    let mut acc = BigRational::zero();
    for (pos, d) in x.stored_digits() {
        if d != 0 {
            acc += BigRational::from_integer(BigInt::from(d))
                * prime_power_rational(x.prime(), -pos - 1);
        }
    }
    Ok(acc)
}

/// The inverse digit reversal: the unique finite expansion mapping to `r`.
/// `r` must be nonnegative with a p-power denominator.
pub fn monna_map_inverse(r: &BigRational, p: u32) -> Result<PAdic> {
    if r.is_negative() {
        return Err(Error::NegativeReal);
    }
    let p_big = BigInt::from(p);
    let mut den = r.denom().clone();
    let mut k = 0i64;
    while !den.is_one() {
        if (&den % &p_big).is_zero() {
            den /= &p_big;
            k += 1;
        } else {
            return Err(Error::NotPPowerDenominator { prime: p });
        }
    }
    // r = num / p^k: the base-p digit of num at place e is the p-adic digit
    // at position k - 1 - e
    let mut num = r.numer().to_biguint().expect("nonnegative");
    let mut digits_desc = Vec::new();
    let p_bigu = BigUint::from(p);
    while !num.is_zero() {
        let d = (&num % &p_bigu).to_u32().expect("digit fits");
        digits_desc.push(d);
        num /= &p_bigu;
    }
    // digits_desc[e] sits at p-adic position k - 1 - e; lowest position is
    // k - 1 - (len - 1)
    let len = digits_desc.len();
    if len == 0 {
        return PAdic::exact_zero(p);
    }
    let digits_asc: Vec<u32> = digits_desc.into_iter().rev().collect();
    PAdic::from_exact_digits(p, k - len as i64, digits_asc)
}

/// The image of a ball under the digit reversal: writing the ball as
/// `p^m n + p^k Z_p` with `n` in `Q_p/Z_p`, the image is the interval
/// `p^-m rho(n) + [0, p^-k)`. The interval length equals the ball measure.
pub fn ball_image(ball: &Ball) -> RealInterval {
    let left = monna_map(&ball.center_padic()).expect("canonical centers are finite");
    RealInterval {
        left,
        length: ball.measure(),
    }
}

/// The Haar wavelet `2^(-gamma/2) Psi(2^-gamma t - n)` on the half-line,
/// with `Psi = +1` on `[0, 1/2)`, `-1` on `[1/2, 1)` and `0` elsewhere.
/// Half-open pieces make the identity with the p = 2 wavelet pointwise true
/// on finite expansions, not just almost everywhere.
pub fn haar_eval(gamma: i64, n: &BigUint, t: &BigRational) -> f64 {
    let s =
        t * prime_power_rational(2, -gamma) - BigRational::from_integer(BigInt::from(n.clone()));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let profile = if s >= BigRational::zero() && s < half {
        1.0
    } else if s >= half && s < BigRational::one() {
        -1.0
    } else {
        0.0
    };
    profile * prime_power_sqrt_f64(2, -gamma)
}

/// Compares the Haar wavelet at `(gamma, rho(n))` against the 2-adic basis
/// wavelet `psi_{gamma,n,1}` through the change of variable, at `samples`
/// seeded finite-expansion points straddling the support; returns the
/// largest absolute difference.
pub fn haar_correspondence<R: Rng>(
    gamma: i64,
    coset: &CosetRep,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if coset.prime() != 2 {
        return Err(Error::PrimeMismatch {
            left: 2,
            right: coset.prime(),
        });
    }
    let index = WaveletIndex::new(gamma, coset.clone(), 1)?;
    let wavelet = basis_wavelet(&index);
    let n_image = coset.reversal_index();
    let support = index.support();
    let mut worst = 0.0f64;
    for x in crate::sampling::sample_points_around(rng, &support, samples) {
        let lhs = haar_eval(gamma, &n_image, &monna_map(&x)?);
        let rhs = wavelet.evaluate(&x)?;
        let err = (rhs - num_complex::Complex64::new(lhs, 0.0)).norm();
        worst = worst.max(err);
    }
    Ok(worst)
}
