//! Exact finite-precision p-adic numbers.
//!
//! A nonzero p-adic number is a digit series `x = sum_{j>=v} x_j p^j` with
//! `x_j` in `[0, p-1]` and `x_v != 0`. We store a finite digit window and
//! track what is known about the rest:
//!
//! * **exact** values: every digit above the stored window is zero, so the
//!   value is the finite sum of its window. Nonnegative rationals whose
//!   denominator is a power of p, and digit literals, are exact.
//! * **windowed** values: the value is known modulo `p^N` with
//!   `N = valuation + digits.len()`. Negative rationals and rationals with a
//!   denominator unit have infinite periodic expansions and are stored this
//!   way.
//! * **zero to precision**: every known digit is zero, i.e. the value is
//!   `O(p^N)`, but it is not known to be the literal zero. Its valuation and
//!   norm are indeterminate and asking for them is an error.
//! * **exact zero**: the literal zero, flagged distinctly; its valuation is
//!   plus infinity and its norm is 0.
//!
//! Operations propagate precision with the usual rules (minimum of absolute
//! precisions for addition, minimum of relative precisions for
//! multiplication and inversion) and never truncate silently.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Relative digit window used when an operation on exact inputs produces an
/// infinite expansion (negation, inversion) and no window is available from
/// the operands.
pub const DEFAULT_REL_DIGITS: usize = 32;

/// Bounds on digit literals, so hostile input cannot push position
/// arithmetic toward i64 overflow or allocate unbounded digit windows.
const LITERAL_POSITION_BOUND: u64 = 1 << 32;
const LITERAL_DIGIT_LIMIT: usize = 1 << 16;

/// Trial-division primality check; the primes in play are small.
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn check_prime(p: u32) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Multiplicative inverse of `d` modulo the prime `p`, for `d` in `[1, p-1]`.
pub fn mod_inverse(d: u32, p: u32) -> u32 {
    // extended Euclid on i64; p < 2^31 so no overflow
    let (mut r0, mut r1) = (p as i64, (d % p) as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "{d} not invertible mod {p}");
    t0.rem_euclid(p as i64) as u32
}

fn pow_biguint(p: u32, e: usize) -> BigUint {
    BigUint::from(p).pow(e as u32)
}

/// `p^k` as an exact rational, for any integer `k`.
pub fn prime_power_rational(p: u32, k: i64) -> BigRational {
    let mag = BigInt::from(p).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// Valuation of a p-adic number: finite for nonzero values, infinite for the
/// exact zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(&self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(*v),
            Valuation::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    /// The literal zero.
    ExactZero,
    /// Zero modulo `p^precision`, not known to be exactly zero.
    ZeroMod { precision: i64 },
    /// `sum digits[i] * p^(valuation+i)` with `digits[0] != 0`.
    /// When `exact` holds, every digit above the window is zero and the
    /// trailing stored digit is nonzero; otherwise the value is known
    /// modulo `p^(valuation + digits.len())`.
    Digits {
        valuation: i64,
        digits: Vec<u32>,
        exact: bool,
    },
}

/// A finite-precision p-adic number. See the module docs for the precision
/// model. Values are immutable; all operations are pure functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdic {
    prime: u32,
    kind: Kind,
}

impl PAdic {
    pub fn exact_zero(p: u32) -> Result<Self> {
        check_prime(p)?;
        Ok(PAdic {
            prime: p,
            kind: Kind::ExactZero,
        })
    }

    /// `O(p^precision)`: zero as far as the window can see.
    pub fn zero_to_precision(p: u32, precision: i64) -> Result<Self> {
        check_prime(p)?;
        Ok(PAdic {
            prime: p,
            kind: Kind::ZeroMod { precision },
        })
    }

    /// Exact value from a digit window: `sum digits[i] * p^(valuation+i)`,
    /// with all higher digits zero.
    pub fn from_exact_digits(p: u32, valuation: i64, digits: Vec<u32>) -> Result<Self> {
        check_prime(p)?;
        for &d in &digits {
            if d >= p {
                return Err(Error::DigitOutOfRange { digit: d, prime: p });
            }
        }
        Ok(Self::build_exact(p, valuation, digits))
    }

    fn build_exact(p: u32, mut valuation: i64, mut digits: Vec<u32>) -> Self {
        while digits.last() == Some(&0) {
            digits.pop();
        }
        let lead = digits.iter().position(|&d| d != 0);
        match lead {
            None => PAdic {
                prime: p,
                kind: Kind::ExactZero,
            },
            Some(shift) => {
                digits.drain(..shift);
                valuation += shift as i64;
                PAdic {
                    prime: p,
                    kind: Kind::Digits {
                        valuation,
                        digits,
                        exact: true,
                    },
                }
            }
        }
    }

    fn build_window(p: u32, valuation: i64, digits: Vec<u32>) -> Self {
        let precision = valuation + digits.len() as i64;
        let lead = digits.iter().position(|&d| d != 0);
        match lead {
            None => PAdic {
                prime: p,
                kind: Kind::ZeroMod { precision },
            },
            Some(shift) => {
                let mut digits = digits;
                digits.drain(..shift);
                PAdic {
                    prime: p,
                    kind: Kind::Digits {
                        valuation: valuation + shift as i64,
                        digits,
                        exact: false,
                    },
                }
            }
        }
    }

    pub fn from_u64(p: u32, n: u64) -> Result<Self> {
        check_prime(p)?;
        let mut digits = Vec::new();
        let mut m = n;
        while m > 0 {
            digits.push((m % p as u64) as u32);
            m /= p as u64;
        }
        Ok(Self::build_exact(p, 0, digits))
    }

    /// Canonical expansion of `num/den`. Exact when the expansion terminates
    /// (nonnegative value with a p-power denominator); otherwise a window of
    /// `rel_digits` digits above the valuation.
    pub fn from_rational(p: u32, num: &BigInt, den: &BigInt, rel_digits: usize) -> Result<Self> {
        check_prime(p)?;
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Self::exact_zero(p);
        }
        let mut num = num.clone();
        let mut den = den.clone();
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let p_big = BigInt::from(p);
        let mut valuation = 0i64;
        while (&num % &p_big).is_zero() {
            num /= &p_big;
            valuation += 1;
        }
        while (&den % &p_big).is_zero() {
            den /= &p_big;
            valuation -= 1;
        }
        // digit extraction: d = num * den^{-1} mod p, then divide the tail by p
        let den_mod_p = (&den % &p_big)
            .to_i64()
            .expect("residue fits")
            .rem_euclid(p as i64) as u32;
        let den_inv = mod_inverse(den_mod_p, p) as i64;
        let mut digits = Vec::with_capacity(rel_digits);
        let mut m = num;
        let mut exact = false;
        for _ in 0..rel_digits {
            if m.is_zero() {
                exact = true;
                break;
            }
            let r = (&m % &p_big)
                .to_i64()
                .expect("residue fits")
                .rem_euclid(p as i64);
            let d = ((r * den_inv) % p as i64) as u32;
            digits.push(d);
            m = (m - BigInt::from(d) * &den) / &p_big;
        }
        if m.is_zero() {
            exact = true;
        }
        if exact {
            Ok(Self::build_exact(p, valuation, digits))
        } else {
            Ok(Self::build_window(p, valuation, digits))
        }
    }

    /// Parses a p-adic literal. Grammar:
    ///
    /// * `m/n` or `m` — decimal integers with optional sign; expanded to
    ///   `rel_digits` digits when the expansion does not terminate;
    /// * `v=<int>;digits=d0,d1,...,dk` — an exact finite expansion with
    ///   digit `d0` at position `v`.
    pub fn parse(text: &str, p: u32, rel_digits: usize) -> Result<Self> {
        check_prime(p)?;
        let t = text.trim();
        let parse_err = |reason: &str| Error::ParseLiteral {
            literal: text.to_string(),
            reason: reason.to_string(),
        };
        if t.is_empty() {
            return Err(parse_err("empty literal"));
        }
        if let Some(rest) = t.strip_prefix("v=") {
            let (v_part, d_part) = rest
                .split_once(";digits=")
                .ok_or_else(|| parse_err("expected `;digits=` after the valuation"))?;
            let valuation: i64 = v_part
                .trim()
                .parse()
                .map_err(|_| parse_err("invalid valuation"))?;
            // keep position arithmetic far away from i64 overflow
            if valuation.unsigned_abs() > LITERAL_POSITION_BOUND {
                return Err(parse_err("valuation out of the supported range"));
            }
            let mut digits = Vec::new();
            for piece in d_part.split(',') {
                let d: u32 = piece
                    .trim()
                    .parse()
                    .map_err(|_| parse_err("invalid digit"))?;
                if d >= p {
                    return Err(Error::DigitOutOfRange { digit: d, prime: p });
                }
                if digits.len() >= LITERAL_DIGIT_LIMIT {
                    return Err(parse_err("digit literal too long"));
                }
                digits.push(d);
            }
            return Self::from_exact_digits(p, valuation, digits);
        }
        let (num_text, den_text) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num: BigInt = num_text
            .parse()
            .map_err(|_| parse_err("invalid numerator"))?;
        let den: BigInt = den_text
            .parse()
            .map_err(|_| parse_err("invalid denominator"))?;
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Self::from_rational(p, &num, &den, rel_digits)
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.kind, Kind::ExactZero)
    }

    pub fn is_zero_to_precision(&self) -> bool {
        matches!(self.kind, Kind::ExactZero | Kind::ZeroMod { .. })
    }

    /// Whether every digit above the stored window is known to be zero.
    pub fn is_exact(&self) -> bool {
        match &self.kind {
            Kind::ExactZero => true,
            Kind::ZeroMod { .. } => false,
            Kind::Digits { exact, .. } => *exact,
        }
    }

    /// Absolute precision: digits at positions below the returned bound are
    /// known. `None` means every digit is known (exact values).
    pub fn precision(&self) -> Option<i64> {
        match &self.kind {
            Kind::ExactZero => None,
            Kind::ZeroMod { precision } => Some(*precision),
            Kind::Digits {
                valuation,
                digits,
                exact,
            } => {
                if *exact {
                    None
                } else {
                    Some(valuation + digits.len() as i64)
                }
            }
        }
    }

    fn known_below(&self) -> i64 {
        self.precision().unwrap_or(i64::MAX)
    }

    pub fn valuation(&self) -> Result<Valuation> {
        match &self.kind {
            Kind::ExactZero => Ok(Valuation::Infinite),
            Kind::ZeroMod { precision } => Err(Error::IndeterminateValuation {
                prime: self.prime,
                precision: *precision,
            }),
            Kind::Digits { valuation, .. } => Ok(Valuation::Finite(*valuation)),
        }
    }

    /// `|x|_p` as an exact rational: `p^(-valuation)`, and 0 for the exact
    /// zero.
    pub fn norm(&self) -> Result<BigRational> {
        match self.valuation()? {
            Valuation::Infinite => Ok(BigRational::zero()),
            Valuation::Finite(v) => Ok(prime_power_rational(self.prime, -v)),
        }
    }

    /// The coefficient of `p^k` in the canonical expansion.
    pub fn digit_at(&self, k: i64) -> Result<u32> {
        match &self.kind {
            Kind::ExactZero => Ok(0),
            Kind::ZeroMod { precision } => {
                if k < *precision {
                    Ok(0)
                } else {
                    Err(Error::InsufficientPrecision {
                        position: k,
                        known_below: *precision,
                    })
                }
            }
            Kind::Digits {
                valuation,
                digits,
                exact,
            } => {
                if k < *valuation {
                    Ok(0)
                } else if k < valuation + digits.len() as i64 {
                    Ok(digits[(k - valuation) as usize])
                } else if *exact {
                    Ok(0)
                } else {
                    Err(Error::InsufficientPrecision {
                        position: k,
                        known_below: valuation + digits.len() as i64,
                    })
                }
            }
        }
    }

    /// Multiplies by `p^k` (an exact digit shift).
    pub fn shifted(&self, k: i64) -> Self {
        let kind = match &self.kind {
            Kind::ExactZero => Kind::ExactZero,
            Kind::ZeroMod { precision } => Kind::ZeroMod {
                precision: precision + k,
            },
            Kind::Digits {
                valuation,
                digits,
                exact,
            } => Kind::Digits {
                valuation: valuation + k,
                digits: digits.clone(),
                exact: *exact,
            },
        };
        PAdic {
            prime: self.prime,
            kind,
        }
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

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        let p = self.prime;
        match (&self.kind, &other.kind) {
            (Kind::ExactZero, _) => return Ok(other.clone()),
            (_, Kind::ExactZero) => return Ok(self.clone()),
            _ => {}
        }
        let bound = self.known_below().min(other.known_below());
        if bound == i64::MAX {
            // both exact: full-width addition
            let (v1, d1) = self.window();
            let (v2, d2) = other.window();
            let v = v1.min(v2);
            let top = (v1 + d1.len() as i64).max(v2 + d2.len() as i64);
            let mut digits = Vec::with_capacity((top - v) as usize + 1);
            let mut carry = 0u64;
            for pos in v..=top {
                let a = self.digit_at(pos).unwrap() as u64;
                let b = other.digit_at(pos).unwrap() as u64;
                let s = a + b + carry;
                digits.push((s % p as u64) as u32);
                carry = s / p as u64;
            }
            debug_assert_eq!(carry, 0);
            return Ok(Self::build_exact(p, v, digits));
        }
        // windowed addition modulo p^bound
        let v = match (&self.kind, &other.kind) {
            (Kind::Digits { valuation: v1, .. }, Kind::Digits { valuation: v2, .. }) => {
                (*v1).min(*v2)
            }
            (Kind::Digits { valuation, .. }, _) | (_, Kind::Digits { valuation, .. }) => {
                (*valuation).min(bound)
            }
            _ => bound,
        };
        if v >= bound {
            return Ok(PAdic {
                prime: p,
                kind: Kind::ZeroMod { precision: bound },
            });
        }
        let mut digits = Vec::with_capacity((bound - v) as usize);
        let mut carry = 0u64;
        for pos in v..bound {
            let a = self.digit_at(pos).unwrap() as u64;
            let b = other.digit_at(pos).unwrap() as u64;
            let s = a + b + carry;
            digits.push((s % p as u64) as u32);
            carry = s / p as u64;
        }
        Ok(Self::build_window(p, v, digits))
    }

    pub fn neg(&self) -> Self {
        let p = self.prime;
        match &self.kind {
            Kind::ExactZero => self.clone(),
            Kind::ZeroMod { .. } => self.clone(),
            Kind::Digits {
                valuation,
                digits,
                exact,
            } => {
                // complement: p - d0 at the valuation, then p-1-d above,
                // continuing with p-1 through the window for exact inputs
                let width = if *exact {
                    digits.len().max(DEFAULT_REL_DIGITS)
                } else {
                    digits.len()
                };
                let mut out = Vec::with_capacity(width);
                out.push(p - digits[0]);
                for i in 1..width {
                    let d = digits.get(i).copied().unwrap_or(0);
                    out.push(p - 1 - d);
                }
                Self::build_window(p, *valuation, out)
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_prime(other)?;
        let p = self.prime;
        match (&self.kind, &other.kind) {
            (Kind::ExactZero, _) | (_, Kind::ExactZero) => return PAdic::exact_zero(p),
            (Kind::ZeroMod { precision: n1 }, Kind::ZeroMod { precision: n2 }) => {
                return PAdic::zero_to_precision(p, n1 + n2)
            }
            (Kind::ZeroMod { precision }, Kind::Digits { valuation, .. })
            | (Kind::Digits { valuation, .. }, Kind::ZeroMod { precision }) => {
                return PAdic::zero_to_precision(p, precision + valuation)
            }
            _ => {}
        }
        let (v1, d1) = self.window();
        let (v2, d2) = other.window();
        let exact = self.is_exact() && other.is_exact();
        let rel = if exact {
            d1.len() + d2.len()
        } else {
            let r1 = if self.is_exact() {
                usize::MAX
            } else {
                d1.len()
            };
            let r2 = if other.is_exact() {
                usize::MAX
            } else {
                d2.len()
            };
            r1.min(r2)
        };
        let digits = mul_digit_windows(p, d1, d2, rel);
        let v = v1 + v2;
        if exact {
            Ok(Self::build_exact(p, v, digits))
        } else {
            Ok(Self::build_window(p, v, digits))
        }
    }

    /// Multiplicative inverse. Errors on the exact zero and on
    /// zero-to-precision values.
    pub fn inv(&self) -> Result<Self> {
        let p = self.prime;
        match &self.kind {
            Kind::ExactZero => Err(Error::DivisionByZero),
            Kind::ZeroMod { precision } => Err(Error::IndeterminateValuation {
                prime: p,
                precision: *precision,
            }),
            Kind::Digits {
                valuation,
                digits,
                exact,
            } => {
                if *exact && digits == &[1] {
                    // 1/p^v is again a finite expansion
                    return Ok(PAdic {
                        prime: p,
                        kind: Kind::Digits {
                            valuation: -valuation,
                            digits: vec![1],
                            exact: true,
                        },
                    });
                }
                let rel = if *exact {
                    digits.len().max(DEFAULT_REL_DIGITS)
                } else {
                    digits.len()
                };
                let modulus = pow_biguint(p, rel);
                let unit = digits_to_biguint(p, digits);
                // unit^(phi(p^rel) - 1) = unit^{-1} mod p^rel
                let phi = pow_biguint(p, rel - 1) * BigUint::from(p - 1);
                let inv = unit.modpow(&(phi - BigUint::one()), &modulus);
                let digits = biguint_to_digits(p, &inv, rel);
                Ok(Self::build_window(p, -valuation, digits))
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv()?)
    }

    fn window(&self) -> (i64, &[u32]) {
        match &self.kind {
            Kind::Digits {
                valuation, digits, ..
            } => (*valuation, digits),
            _ => (0, &[]),
        }
    }

    /// The stored digit window as `(position, digit)` pairs, lowest first.
    pub fn stored_digits(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        let (v, digits) = self.window();
        digits
            .iter()
            .enumerate()
            .map(move |(i, &d)| (v + i as i64, d))
    }

    /// Fractional part `{x} = sum_{j<0} x_j p^j` as a rational in `[0,1)`.
    pub fn fractional_part(&self) -> Result<BigRational> {
        match &self.kind {
            Kind::ExactZero => Ok(BigRational::zero()),
            Kind::ZeroMod { precision } => {
                if *precision >= 0 {
                    Ok(BigRational::zero())
                } else {
                    Err(Error::InsufficientPrecision {
                        position: *precision,
                        known_below: *precision,
                    })
                }
            }
            Kind::Digits {
                valuation,
                digits,
                exact,
            } => {
                if *valuation >= 0 {
                    return Ok(BigRational::zero());
                }
                let known_below = if *exact {
                    i64::MAX
                } else {
                    valuation + digits.len() as i64
                };
                if known_below < 0 {
                    return Err(Error::InsufficientPrecision {
                        position: known_below,
                        known_below,
                    });
                }
                let mut acc = BigRational::zero();
                for pos in *valuation..0 {
                    let d = self.digit_at(pos)?;
                    if d != 0 {
                        acc += BigRational::from_integer(BigInt::from(d))
                            * prime_power_rational(self.prime, pos);
                    }
                }
                Ok(acc)
            }
        }
    }

    /// The additive character `chi(x) = exp(2 pi i {x})` as an exact phase.
    pub fn character(&self) -> Result<UnitPhase> {
        Ok(UnitPhase::new(self.fractional_part()?))
    }

    /// The inverse mod p of the leading digit, i.e. `(x |x|_p)^{-1} mod p`.
    pub fn unit_leading_inverse(&self) -> Result<u32> {
        match &self.kind {
            Kind::ExactZero => Err(Error::DivisionByZero),
            Kind::ZeroMod { precision } => Err(Error::IndeterminateValuation {
                prime: self.prime,
                precision: *precision,
            }),
            Kind::Digits { digits, .. } => Ok(mod_inverse(digits[0], self.prime)),
        }
    }

    /// The class of `x` in `Q_p/Z_p`: its negative-position digits.
    pub fn coset_rep(&self) -> Result<CosetRep> {
        match &self.kind {
            Kind::ExactZero => Ok(CosetRep::zero(self.prime)),
            Kind::ZeroMod { precision } => {
                if *precision >= 0 {
                    Ok(CosetRep::zero(self.prime))
                } else {
                    Err(Error::InsufficientPrecision {
                        position: *precision,
                        known_below: *precision,
                    })
                }
            }
            Kind::Digits { valuation, .. } => {
                if *valuation >= 0 {
                    return Ok(CosetRep::zero(self.prime));
                }
                if self.known_below() < 0 {
                    return Err(Error::InsufficientPrecision {
                        position: 0,
                        known_below: self.known_below(),
                    });
                }
                let depth = (-valuation) as usize;
                let mut rev = Vec::with_capacity(depth);
                for i in 0..depth {
                    rev.push(self.digit_at(-1 - i as i64)?);
                }
                Ok(CosetRep::from_rev_digits(self.prime, rev))
            }
        }
    }

    /// The canonical representative `sum digits[i] p^(v+i)` of the stored
    /// window, as an exact rational. For exact values this is the value
    /// itself; for windowed values it is the representative mod `p^N`.
    pub fn rational_window(&self) -> BigRational {
        let (v, digits) = self.window();
        let mut num = BigInt::zero();
        for &d in digits.iter().rev() {
            num = num * BigInt::from(self.prime) + BigInt::from(d);
        }
        BigRational::from_integer(num) * prime_power_rational(self.prime, v)
    }

    /// The exact rational value; errors when the expansion is not finite.
    pub fn exact_rational(&self) -> Result<BigRational> {
        if self.is_exact() {
            Ok(self.rational_window())
        } else {
            Err(Error::InfiniteExpansion)
        }
    }

    /// Valuation of `self - other`, i.e. the first position where the digit
    /// expansions differ. `Infinite` means the values are equal (decidable
    /// only when both are exact).
    pub fn difference_valuation(&self, other: &Self) -> Result<Valuation> {
        self.check_same_prime(other)?;
        let bound = self.known_below().min(other.known_below());
        let start = match (&self.kind, &other.kind) {
            (Kind::Digits { valuation: v1, .. }, Kind::Digits { valuation: v2, .. }) => {
                (*v1).min(*v2)
            }
            (Kind::Digits { valuation, .. }, _) | (_, Kind::Digits { valuation, .. }) => *valuation,
            _ => {
                return if bound == i64::MAX {
                    Ok(Valuation::Infinite)
                } else {
                    Err(Error::IndeterminateValuation {
                        prime: self.prime,
                        precision: bound,
                    })
                }
            }
        };
        let scan_end = if bound == i64::MAX {
            let top1 = self.window().0 + self.window().1.len() as i64;
            let top2 = other.window().0 + other.window().1.len() as i64;
            top1.max(top2)
        } else {
            bound
        };
        for pos in start..scan_end {
            if self.digit_at(pos)? != other.digit_at(pos)? {
                return Ok(Valuation::Finite(pos));
            }
        }
        if bound == i64::MAX {
            Ok(Valuation::Infinite)
        } else {
            Err(Error::InsufficientPrecision {
                position: bound,
                known_below: bound,
            })
        }
    }

    /// Renders the stored window as a parseable digit literal. Windowed
    /// values carry a `mod p^N` suffix and are for diagnostics only.
    pub fn to_literal(&self) -> String {
        match &self.kind {
            Kind::ExactZero => "0".to_string(),
            Kind::ZeroMod { precision } => format!("0 (mod {}^{})", self.prime, precision),
            Kind::Digits {
                valuation,
                digits,
                exact,
            } => {
                let ds: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
                let body = format!("v={};digits={}", valuation, ds.join(","));
                if *exact {
                    body
                } else {
                    format!(
                        "{} (mod {}^{})",
                        body,
                        self.prime,
                        valuation + digits.len() as i64
                    )
                }
            }
        }
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_literal())
    }
}

fn digits_to_biguint(p: u32, digits: &[u32]) -> BigUint {
    let mut acc = BigUint::zero();
    for &d in digits.iter().rev() {
        acc = acc * BigUint::from(p) + BigUint::from(d);
    }
    acc
}

fn biguint_to_digits(p: u32, value: &BigUint, width: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(width);
    let mut v = value.clone();
    let p_big = BigUint::from(p);
    for _ in 0..width {
        let (q, r) = v.div_rem(&p_big);
        out.push(r.to_u32().expect("digit fits"));
        v = q;
    }
    out
}

/// Schoolbook product of two digit windows, truncated to `rel` digits.
fn mul_digit_windows(p: u32, a: &[u32], b: &[u32], rel: usize) -> Vec<u32> {
    let width = rel.min(a.len() + b.len());
    let mut out = Vec::with_capacity(width);
    let mut carry: u128 = 0;
    for k in 0..width {
        let mut acc = carry;
        let lo = k.saturating_sub(b.len() - 1);
        let hi = k.min(a.len() - 1);
        for i in lo..=hi {
            acc += a[i] as u128 * b[k - i] as u128;
        }
        out.push((acc % p as u128) as u32);
        carry = acc / p as u128;
    }
    out
}

/// An exact point on the unit circle: the stored rational `q` in `[0,1)`
/// denotes `exp(2 pi i q)`. Character values keep a power of p in the
/// denominator; all group operations stay at the rational level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitPhase {
    value: BigRational,
}

impl UnitPhase {
    pub fn zero() -> Self {
        UnitPhase {
            value: BigRational::zero(),
        }
    }

    /// Reduces an arbitrary rational modulo 1 into `[0,1)`.
    pub fn new(q: BigRational) -> Self {
        let f = q.floor();
        UnitPhase { value: q - f }
    }

    pub fn from_fraction(num: i64, den: i64) -> Self {
        assert!(den != 0);
        Self::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn numerator(&self) -> BigInt {
        self.value.numer().clone()
    }

    pub fn denominator(&self) -> BigInt {
        self.value.denom().clone()
    }

    /// Group law: phases add modulo 1.
    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.value + &other.value)
    }

    /// Complex conjugation: `q -> -q mod 1`.
    pub fn conjugate(&self) -> Self {
        Self::new(-&self.value)
    }

    /// Integer power of the phase: `q -> k q mod 1`.
    pub fn scaled(&self, k: i64) -> Self {
        Self::new(&self.value * BigRational::from_integer(BigInt::from(k)))
    }

    /// Evaluates `exp(2 pi i q)`. Quarter phases are returned as exact
    /// complex units so that p = 2 computations stay free of rounding.
    pub fn to_complex(&self) -> num_complex::Complex64 {
        use num_complex::Complex64;
        if let (Some(n), Some(d)) = (self.value.numer().to_i64(), self.value.denom().to_i64()) {
            match (n, d) {
                (0, _) => return Complex64::new(1.0, 0.0),
                (1, 2) => return Complex64::new(-1.0, 0.0),
                (1, 4) => return Complex64::new(0.0, 1.0),
                (3, 4) => return Complex64::new(0.0, -1.0),
                _ => {}
            }
        }
        let q =
            self.value.numer().to_f64().unwrap_or(0.0) / self.value.denom().to_f64().unwrap_or(1.0);
        let angle = 2.0 * std::f64::consts::PI * q;
        Complex64::new(angle.cos(), angle.sin())
    }
}

impl fmt::Display for UnitPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.value.numer(), self.value.denom())
    }
}

/// An element of `Q_p/Z_p`: a finite expansion with digits only at negative
/// positions. `rev_digits[i]` is the digit at position `-1-i`, so the vector
/// reads the digits in the order the digit-reversal map consumes them; the
/// trailing entry is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CosetRep {
    prime: u32,
    rev_digits: Vec<u32>,
}

impl CosetRep {
    pub fn zero(p: u32) -> Self {
        CosetRep {
            prime: p,
            rev_digits: Vec::new(),
        }
    }

    pub fn from_rev_digits(p: u32, mut rev_digits: Vec<u32>) -> Self {
        while rev_digits.last() == Some(&0) {
            rev_digits.pop();
        }
        CosetRep {
            prime: p,
            rev_digits,
        }
    }

    /// The coset whose digit-reversal image is the integer `index`; this
    /// enumerates `Q_p/Z_p` bijectively from `N_0`.
    pub fn from_index(p: u32, index: u64) -> Self {
        let mut rev = Vec::new();
        let mut m = index;
        while m > 0 {
            rev.push((m % p as u64) as u32);
            m /= p as u64;
        }
        CosetRep {
            prime: p,
            rev_digits: rev,
        }
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.rev_digits.is_empty()
    }

    /// Number of fractional digits: the lowest digit sits at position
    /// `-depth`.
    pub fn depth(&self) -> usize {
        self.rev_digits.len()
    }

    /// Digit at position `k` (nonzero only for `-depth <= k <= -1`).
    pub fn digit_at(&self, k: i64) -> u32 {
        if k >= 0 || k < -(self.rev_digits.len() as i64) {
            0
        } else {
            self.rev_digits[(-1 - k) as usize]
        }
    }

    /// The value as an exact rational in `[0, 1)`.
    pub fn rational(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (i, &d) in self.rev_digits.iter().enumerate() {
            if d != 0 {
                acc += BigRational::from_integer(BigInt::from(d))
                    * prime_power_rational(self.prime, -1 - i as i64);
            }
        }
        acc
    }

    /// The digit-reversal image: a nonnegative integer.
    pub fn reversal_index(&self) -> BigUint {
        let mut acc = BigUint::zero();
        for &d in self.rev_digits.iter().rev() {
            acc = acc * BigUint::from(self.prime) + BigUint::from(d);
        }
        acc
    }

    /// The coset as an exact p-adic value (its canonical representative).
    pub fn to_padic(&self) -> PAdic {
        let depth = self.rev_digits.len();
        if depth == 0 {
            return PAdic {
                prime: self.prime,
                kind: Kind::ExactZero,
            };
        }
        let digits: Vec<u32> = self.rev_digits.iter().rev().copied().collect();
        // digits[0] sits at position -depth
        PAdic::build_exact(self.prime, -(depth as i64), digits)
    }

    /// The representative shifted to scale `gamma`: the exact value
    /// `p^(-gamma) n`, the center of the wavelet support.
    pub fn shifted_padic(&self, gamma: i64) -> PAdic {
        self.to_padic().shifted(-gamma)
    }

    /// Renders the coset as a reduced rational literal, e.g. `"1/27"`.
    pub fn to_literal(&self) -> String {
        let r = self.rational();
        if r.is_zero() {
            "0".to_string()
        } else if r.denom().is_one() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }
}

impl fmt::Display for CosetRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_literal())
    }
}

/// Total order on cosets by their digit-reversal index; used to enumerate
/// coefficient tables deterministically.
pub fn coset_order(a: &CosetRep, b: &CosetRep) -> Ordering {
    a.reversal_index().cmp(&b.reversal_index())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn parse(text: &str, p: u32) -> PAdic {
        PAdic::parse(text, p, 32).unwrap()
    }

    /// Multiply-back oracle: the stored window is congruent to the parsed
    /// rational modulo p^N (N = window top), checked with exact rational
    /// arithmetic.
    fn assert_window_congruent(x: &PAdic, num: i64, den: i64) {
        let rep = x.rational_window();
        let diff = rep - rat(num, den);
        if diff.is_zero() {
            return;
        }
        let bound = match x.precision() {
            Some(n) => n,
            None => panic!("exact value disagrees with {num}/{den}"),
        };
        // v_p(diff) >= bound
        let p = BigInt::from(x.prime());
        let mut n = diff.numer().clone();
        let mut d = diff.denom().clone();
        let mut v = 0i64;
        while (&n % &p).is_zero() {
            n /= &p;
            v += 1;
        }
        while (&d % &p).is_zero() {
            d /= &p;
            v -= 1;
        }
        assert!(v >= bound, "difference has valuation {v}, need >= {bound}");
    }

    #[test]
    fn parse_five_fourths_base_two() {
        let x = parse("5/4", 2);
        assert!(x.is_exact());
        assert_eq!(x.valuation().unwrap(), Valuation::Finite(-2));
        let expect = [1, 0, 1, 0, 0, 0, 0, 0];
        for (i, &d) in expect.iter().enumerate() {
            assert_eq!(x.digit_at(-2 + i as i64).unwrap(), d);
        }
    }

    #[test]
    fn parse_minus_one_base_three() {
        let x = PAdic::parse("-1", 3, 4).unwrap();
        assert_eq!(x.valuation().unwrap(), Valuation::Finite(0));
        for k in 0..4 {
            assert_eq!(x.digit_at(k).unwrap(), 2);
        }
        assert_window_congruent(&x, -1, 1);
        assert!(!x.is_exact());
    }

    #[test]
    fn parse_one_seventh_base_five() {
        let x = PAdic::parse("1/7", 5, 6).unwrap();
        assert_eq!(x.digit_at(0).unwrap(), 3);
        assert_window_congruent(&x, 1, 7);
    }

    #[test]
    fn parse_digit_literal() {
        let x = PAdic::parse("v=-2;digits=1,0,1", 2, 32).unwrap();
        assert_eq!(x, parse("5/4", 2));
        assert!(PAdic::parse("v=0;digits=7", 5, 32).is_err());
        assert!(PAdic::parse("1/0", 5, 32).is_err());
        assert!(PAdic::parse("", 5, 32).is_err());
        assert!(PAdic::parse("5/4", 4, 32).is_err());
    }

    #[test]
    fn add_exact() {
        let x = parse("5/4", 2);
        let y = parse("3/4", 2);
        let s = x.add(&y).unwrap();
        assert_eq!(s, parse("2", 2));
        assert_eq!(s.valuation().unwrap(), Valuation::Finite(1));
    }

    #[test]
    fn mul_norm() {
        let x = parse("12", 2);
        let y = parse("1/3", 2);
        let prod = x.mul(&y).unwrap();
        assert_window_congruent(&prod, 4, 1);
        assert_eq!(prod.norm().unwrap(), rat(1, 4));
    }

    #[test]
    fn inverse_multiplies_back() {
        let x = PAdic::parse("2", 7, 5).unwrap();
        let y = x.inv().unwrap();
        let prod = x.mul(&y).unwrap();
        assert_window_congruent(&prod, 1, 1);
    }

    #[test]
    fn norm_and_valuation_examples() {
        let x = parse("12", 2);
        assert_eq!(x.norm().unwrap(), rat(1, 4));
        assert_eq!(x.valuation().unwrap(), Valuation::Finite(2));

        let z = PAdic::exact_zero(2).unwrap();
        assert_eq!(z.norm().unwrap(), BigRational::zero());
        assert_eq!(z.valuation().unwrap(), Valuation::Infinite);

        let y = parse("5/6", 3);
        assert_eq!(y.norm().unwrap(), rat(3, 1));
        assert_eq!(y.valuation().unwrap(), Valuation::Finite(-1));

        let ztp = PAdic::zero_to_precision(3, 10).unwrap();
        assert!(matches!(
            ztp.valuation(),
            Err(Error::IndeterminateValuation { .. })
        ));
    }

    #[test]
    fn fractional_parts() {
        assert_eq!(parse("5/4", 2).fractional_part().unwrap(), rat(1, 4));
        assert_eq!(
            parse("2", 3).fractional_part().unwrap(),
            BigRational::zero()
        );
        // -1/2 = 2^-1 + 1 + 2 + 4 + ... so the fractional part is 1/2
        assert_eq!(parse("-1/2", 2).fractional_part().unwrap(), rat(1, 2));
    }

    #[test]
    fn character_values() {
        use num_complex::Complex64;
        assert_eq!(
            parse("1/2", 2).character().unwrap().to_complex(),
            Complex64::new(-1.0, 0.0)
        );
        assert!(parse("7", 5).character().unwrap().is_zero());
        assert_eq!(
            parse("5/4", 2).character().unwrap().to_complex(),
            Complex64::new(0.0, 1.0)
        );
    }

    #[test]
    fn unit_leading_inverse_examples() {
        assert_eq!(parse("2", 5).unit_leading_inverse().unwrap(), 3);
        assert_eq!(parse("1/3", 3).unit_leading_inverse().unwrap(), 1);
        assert_eq!(parse("10", 7).unit_leading_inverse().unwrap(), 5);
    }

    #[test]
    fn coset_rep_examples() {
        let n = parse("5/4", 2).coset_rep().unwrap();
        assert_eq!(n.rational(), rat(1, 4));

        assert!(parse("9", 5).coset_rep().unwrap().is_zero());

        // -1/3 = 2*3^-1 + 2 + 2*3 + ..., coset 2/3; check x - 2/3 lies in Z_3
        let n = parse("-1/3", 3).coset_rep().unwrap();
        assert_eq!(n.rational(), rat(2, 3));
        let diff = rat(-1, 3) - n.rational();
        assert!(diff.denom().mod_floor(&BigInt::from(3)) != BigInt::zero());
    }

    #[test]
    fn digit_out_of_window_errors() {
        let x = PAdic::parse("-1", 3, 4).unwrap();
        assert!(x.digit_at(3).is_ok());
        assert!(matches!(
            x.digit_at(4),
            Err(Error::InsufficientPrecision { .. })
        ));
        assert_eq!(x.digit_at(-5).unwrap(), 0);
    }

    #[test]
    fn zero_to_precision_propagates() {
        let x = parse("3", 5);
        let d = x.sub(&parse("3", 5)).unwrap();
        assert!(d.is_zero_to_precision());
        assert!(!d.is_exact_zero());
        assert!(d.inv().is_err());
    }

    #[test]
    fn coset_index_roundtrip() {
        for p in [2u32, 3, 5] {
            for idx in 0..50u64 {
                let n = CosetRep::from_index(p, idx);
                assert_eq!(n.reversal_index(), BigUint::from(idx));
                let back = n.to_padic().coset_rep().unwrap();
                assert_eq!(back, n);
            }
        }
    }

    #[test]
    fn phase_quarter_values_are_exact() {
        use num_complex::Complex64;
        assert_eq!(
            UnitPhase::from_fraction(1, 2).to_complex(),
            Complex64::new(-1.0, 0.0)
        );
        assert_eq!(
            UnitPhase::from_fraction(-1, 4).to_complex(),
            Complex64::new(0.0, -1.0)
        );
        assert_eq!(UnitPhase::zero().to_complex(), Complex64::new(1.0, 0.0));
    }

    proptest! {
        #[test]
        fn character_is_a_homomorphism(
            p in prop::sample::select(vec![2u32, 3, 5, 7]),
            an in -2000i64..2000, ad in 1i64..60,
            bn in -2000i64..2000, bd in 1i64..60,
        ) {
            let x = PAdic::from_rational(p, &BigInt::from(an), &BigInt::from(ad), 40).unwrap();
            let y = PAdic::from_rational(p, &BigInt::from(bn), &BigInt::from(bd), 40).unwrap();
            let sum = x.add(&y).unwrap();
            let lhs = sum.character().unwrap();
            let rhs = x.character().unwrap().add(&y.character().unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn norm_is_multiplicative(
            p in prop::sample::select(vec![2u32, 3, 5]),
            an in prop::num::i64::ANY.prop_filter("nonzero", |v| *v != 0),
            bn in prop::num::i64::ANY.prop_filter("nonzero", |v| *v != 0),
            ad in 1i64..1000, bd in 1i64..1000,
        ) {
            let x = PAdic::from_rational(p, &BigInt::from(an), &BigInt::from(ad), 8).unwrap();
            let y = PAdic::from_rational(p, &BigInt::from(bn), &BigInt::from(bd), 8).unwrap();
            let prod = x.mul(&y).unwrap();
            prop_assert_eq!(prod.norm().unwrap(), x.norm().unwrap() * y.norm().unwrap());
        }

        #[test]
        fn ultrametric_inequality(
            p in prop::sample::select(vec![2u32, 3, 5]),
            an in -100000i64..100000, bn in -100000i64..100000,
            ad in 1i64..500, bd in 1i64..500,
        ) {
            let x = PAdic::from_rational(p, &BigInt::from(an), &BigInt::from(ad), 40).unwrap();
            let y = PAdic::from_rational(p, &BigInt::from(bn), &BigInt::from(bd), 40).unwrap();
            let s = x.add(&y).unwrap();
            if !s.is_zero_to_precision() {
                let ns = s.norm().unwrap();
                let nx = x.norm().unwrap();
                let ny = y.norm().unwrap();
                let max = if nx >= ny { nx.clone() } else { ny.clone() };
                prop_assert!(ns <= max);
                if nx != ny {
                    prop_assert_eq!(ns, max);
                }
            }
        }

        #[test]
        fn parse_roundtrips_mod_precision(
            p in prop::sample::select(vec![2u32, 3, 5, 7]),
            n in -100000i64..100000,
            d in prop::num::i64::ANY.prop_filter("nonzero", |v| *v != 0).prop_map(|v| v % 997).prop_filter("nonzero", |v| *v != 0),
        ) {
            let x = PAdic::from_rational(p, &BigInt::from(n), &BigInt::from(d), 24).unwrap();
            if !x.is_exact_zero() {
                let rep = x.rational_window();
                let diff = rep - rat(n, d);
                if !diff.is_zero() {
                    let bound = x.precision().expect("inexact");
                    let pb = BigInt::from(p);
                    let mut num = diff.numer().clone();
                    let mut den = diff.denom().clone();
                    let mut v = 0i64;
                    while (&num % &pb).is_zero() { num /= &pb; v += 1; }
                    while (&den % &pb).is_zero() { den /= &pb; v -= 1; }
                    prop_assert!(v >= bound);
                }
            }
        }

        #[test]
        fn digit_window_reconstructs_value(
            p in prop::sample::select(vec![2u32, 3, 5]),
            n in 0i64..100000,
            shift in -4i64..4,
        ) {
            let x = PAdic::from_rational(p, &BigInt::from(n), &BigInt::one(), 24)
                .unwrap()
                .shifted(shift);
            if let Ok(Valuation::Finite(v)) = x.valuation() {
                let mut acc = BigRational::zero();
                let top = x.precision().unwrap_or(v + 24).min(v + 24);
                for k in v..top {
                    let d = x.digit_at(k).unwrap();
                    acc += BigRational::from_u32(d).unwrap() * prime_power_rational(p, k);
                }
                prop_assert_eq!(acc, x.rational_window());
            }
        }
    }
}
