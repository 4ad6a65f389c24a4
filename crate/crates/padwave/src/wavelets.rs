//! The ultrametric wavelet basis and the affine classification.
//!
//! The mother wavelet is `psi(x) = chi(x/p) Omega(|x|_p)`. The basis
//! vectors are
//!
//! ```text
//! psi_{gamma,n,j}(x) = p^(-gamma/2) chi(p^(gamma-1) j (x - p^-gamma n)) Omega(|p^gamma x - n|_p)
//! ```
//!
//! with `gamma` an integer scale, `n` a coset in `Q_p/Z_p` and
//! `j in {1,...,p-1}`. Every translation/dilation `psi^{a,b}` of the mother
//! wavelet equals a basis vector multiplied by an explicit root of unity;
//! [`classify_affine`] computes that index and phase, which is what makes
//! the continuous transform an exact relabeling of the discrete one.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::padic::{coset_order, CosetRep, PAdic, UnitPhase, Valuation};
use crate::schwartz::{prime_power_f64, prime_power_sqrt_f64, Ball, SchwartzFunction};

/// Basis index `(gamma, n, j)`: scale, translation coset in `Q_p/Z_p`, and
/// the frequency label `j in {1,...,p-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveletIndex {
    gamma: i64,
    coset: CosetRep,
    j: u32,
}

impl WaveletIndex {
    pub fn new(gamma: i64, coset: CosetRep, j: u32) -> Result<Self> {
        let p = coset.prime();
        if j == 0 || j >= p {
            return Err(Error::IndexOutOfRange { j, max: p - 1 });
        }
        Ok(WaveletIndex { gamma, coset, j })
    }

    /// `(gamma, 0, j)` with the zero coset.
    pub fn zero_coset(p: u32, gamma: i64, j: u32) -> Result<Self> {
        Self::new(gamma, CosetRep::zero(p), j)
    }

    pub fn prime(&self) -> u32 {
        self.coset.prime()
    }

    pub fn gamma(&self) -> i64 {
        self.gamma
    }

    pub fn coset(&self) -> &CosetRep {
        &self.coset
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    /// The support of the wavelet: the ball `p^-gamma n + p^-gamma Z_p` of
    /// radius `p^gamma`.
    pub fn support(&self) -> Ball {
        Ball::new(&self.coset.shifted_padic(self.gamma), -self.gamma)
            .expect("exact center is always representable")
    }
}

impl Ord for WaveletIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.gamma
            .cmp(&other.gamma)
            .then_with(|| coset_order(&self.coset, &other.coset))
            .then_with(|| self.j.cmp(&other.j))
    }
}

impl PartialOrd for WaveletIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for WaveletIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(gamma={}, n={}, j={})", self.gamma, self.coset, self.j)
    }
}

/// Translation/dilation parameters `(a, b)` with `a != 0`.
#[derive(Debug, Clone)]
pub struct AffineParams {
    a: PAdic,
    b: PAdic,
    a_valuation: i64,
}

impl AffineParams {
    pub fn new(a: PAdic, b: PAdic) -> Result<Self> {
        if a.prime() != b.prime() {
            return Err(Error::PrimeMismatch {
                left: a.prime(),
                right: b.prime(),
            });
        }
        let a_valuation = match a.valuation()? {
            Valuation::Infinite => return Err(Error::DivisionByZero),
            Valuation::Finite(v) => v,
        };
        Ok(AffineParams { a, b, a_valuation })
    }

    pub fn prime(&self) -> u32 {
        self.a.prime()
    }

    pub fn a(&self) -> &PAdic {
        &self.a
    }

    pub fn b(&self) -> &PAdic {
        &self.b
    }

    pub fn a_valuation(&self) -> i64 {
        self.a_valuation
    }
}

/// Result of classifying a translation/dilation: `psi^{a,b}` equals
/// `exp(2 pi i phase) * psi_index` pointwise. The phase denominator always
/// divides p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub index: WaveletIndex,
    pub phase: UnitPhase,
}

/// The basis wavelet `psi_{gamma,n,j}` as an exact cell representation:
/// `p` cells at scale `1 - gamma`, where the cell `p^-gamma (n + m + p Z_p)`
/// carries the value `p^(-gamma/2) exp(2 pi i j m / p)`.
pub fn basis_wavelet(index: &WaveletIndex) -> SchwartzFunction {
    let p = index.prime();
    let gamma = index.gamma;
    let amplitude = prime_power_sqrt_f64(p, -gamma);
    let scale = 1 - gamma;
    let n = index.coset();
    let depth = n.depth() as i64;
    let mut cells = Vec::with_capacity(p as usize);
    for m in 0..p {
        // exact digits of p^-gamma (n + m): the coset digits followed by m
        let mut digits = Vec::with_capacity(depth as usize + 1);
        for pos in -depth..0 {
            digits.push(n.digit_at(pos));
        }
        digits.push(m);
        let center =
            PAdic::from_exact_digits(p, -depth - gamma, digits).expect("digits below p are valid");
        let ball = Ball::new(&center, scale).expect("exact center");
        let phase = UnitPhase::from_fraction((index.j as i64) * (m as i64), p as i64);
        cells.push((ball, phase.to_complex() * amplitude));
    }
    SchwartzFunction::from_cells(p, scale, cells).expect("cells are disjoint by construction")
}

/// The mother wavelet `psi(x) = chi(x/p) Omega(|x|_p)`, i.e. the basis
/// vector at `(0, 0, 1)`.
pub fn mother_wavelet(p: u32) -> Result<SchwartzFunction> {
    Ok(basis_wavelet(&WaveletIndex::zero_coset(p, 0, 1)?))
}

/// `psi^{a,b} = |a|_p^{-1/2} psi((x-b)/a)` as an exact cell representation.
pub fn affine_wavelet(params: &AffineParams) -> Result<SchwartzFunction> {
    mother_wavelet(params.prime())?.affine_image(params.a(), params.b())
}

/// Classifies the translation/dilation `psi^{a,b}` onto a basis index and a
/// root-of-unity factor:
///
/// * `gamma = log_p |a|_p`,
/// * `n` is the fractional part of `|a|_p b` as a coset in `Q_p/Z_p`,
/// * `j` is the inverse mod p of the leading digit of `a`,
/// * the phase is `chi(-j d0 / p)` where `d0` is the unit digit of
///   `|a|_p b` — the difference between the fractional part of `|a|_p b`
///   and its canonical representative modulo `p Z_p`.
///
/// The contract `psi^{a,b} = exp(2 pi i phase) psi_{gamma,n,j}` is exact.
pub fn classify_affine(params: &AffineParams) -> Result<Classification> {
    let p = params.prime();
    let va = params.a_valuation();
    let gamma = -va;
    let j = params.a().unit_leading_inverse()?;
    // t = |a|_p b = p^-va b
    let t = params.b().shifted(-va);
    let coset = t.coset_rep()?;
    let d0 = t.digit_at(0)?;
    let phase = UnitPhase::from_fraction(-((j as i64) * (d0 as i64)), p as i64);
    Ok(Classification {
        index: WaveletIndex::new(gamma, coset, j)?,
        phase,
    })
}

/// The affine parameters `(p^-gamma j^-1, p^-gamma n)` that reproduce the
/// basis wavelet at `index` with phase zero.
pub fn index_to_affine(index: &WaveletIndex, rel_digits: usize) -> Result<AffineParams> {
    let p = index.prime();
    let j_inv = PAdic::from_rational(
        p,
        &num_bigint::BigInt::from(1),
        &num_bigint::BigInt::from(index.j()),
        rel_digits,
    )?;
    let a = j_inv.shifted(-index.gamma());
    let b = index.coset().shifted_padic(index.gamma());
    AffineParams::new(a, b)
}

/// `<psi_index, f>`: the expansion coefficient of `f` over the basis.
pub fn discrete_coefficient(f: &SchwartzFunction, index: &WaveletIndex) -> Result<Complex64> {
    basis_wavelet(index).inner_product(f)
}

/// The continuous transform `(Tf)(a,b) = <psi^{a,b}, f>`, computed through
/// the classification: the conjugate of the classification phase times the
/// discrete coefficient at the classified index. Agrees with the direct
/// integral [`continuous_transform_direct`] to floating precision.
pub fn continuous_transform(f: &SchwartzFunction, params: &AffineParams) -> Result<Complex64> {
    let cls = classify_affine(params)?;
    let coeff = discrete_coefficient(f, &cls.index)?;
    Ok(cls.phase.conjugate().to_complex() * coeff)
}

/// The continuous transform evaluated as a direct exact-partition inner
/// product against the affinely transformed mother wavelet.
pub fn continuous_transform_direct(
    f: &SchwartzFunction,
    params: &AffineParams,
) -> Result<Complex64> {
    affine_wavelet(params)?.inner_product(f)
}

/// Cosets whose scale-`gamma` wavelet support meets the unit ball; this is
/// the exact index set over which translation cells contribute to the
/// admissibility integral.
fn cosets_meeting_unit_ball(p: u32, gamma: i64) -> Vec<CosetRep> {
    if gamma >= 1 {
        vec![CosetRep::zero(p)]
    } else {
        let count = (p as u64).pow((-gamma) as u32);
        (0..count).map(|i| CosetRep::from_index(p, i)).collect()
    }
}

/// The admissibility constant
/// `C_psi = (1/||psi||^2) int |<psi, psi^{a,b}>|^2 da db / |a|_p^2`,
/// computed by exact cell decomposition: the integrand is constant on the
/// cells `a in p^v (d + p Z_p)`, `b in p^v (n + d0 + p Z_p)` on which the
/// classification is constant, so the integral is a finite sum of cell
/// measures times honestly computed squared coefficients. Scales are
/// enumerated for `|v| <= depth`; the result is exact for any `depth >= 1`
/// because only the cell classifying to `(0, 0, 1)` contributes.
pub fn admissibility_constant(p: u32, depth: i64) -> Result<f64> {
    if depth < 1 {
        return Err(Error::NonPositiveExponent(depth as f64));
    }
    let mother = mother_wavelet(p)?;
    let norm_sq = mother.norm_sq();
    let mut total = 0.0;
    for va in -depth..=depth {
        let gamma = -va;
        // da/|a|_p^2 over the cell p^va (d + p Z_p): measure p^(-va-1),
        // integrand factor |a|^-2 = p^(2 va)
        let weight_a = prime_power_f64(p, va - 1);
        let measure_b = prime_power_f64(p, -va - 1);
        for d in 1..p {
            let j = crate::padic::mod_inverse(d, p);
            for n in cosets_meeting_unit_ball(p, gamma) {
                let index = WaveletIndex::new(gamma, n, j)?;
                let coeff = mother.inner_product(&basis_wavelet(&index))?;
                let contribution = coeff.norm_sqr() * weight_a * measure_b;
                // the p cells over the unit digit d0 of |a|_p b share the
                // index and differ only in the phase, which the modulus
                // removes
                total += contribution * p as f64;
            }
        }
    }
    Ok(total / norm_sq)
}

/// A windowed coefficient table: the support-localized expansion
/// coefficients of `f` for `gamma` in the window, in canonical order
/// (`gamma` ascending, cosets by digit-reversal index, `j` ascending).
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub entries: Vec<(WaveletIndex, Complex64)>,
    /// The enumerated scale range after clipping to scales that can carry a
    /// nonzero coefficient.
    pub gamma_range: (i64, i64),
}

impl CoefficientTable {
    /// `sum |c|^2` over the table, accumulated in canonical order.
    pub fn energy(&self) -> f64 {
        self.entries.iter().map(|(_, c)| c.norm_sqr()).sum()
    }
}

/// Cosets `n` for which `psi_{gamma,n,j}` has support meeting the support
/// of `f`; deduplicated from the cells of `f`. Requires
/// `-gamma <= f.scale()`.
pub fn support_cosets(f: &SchwartzFunction, gamma: i64) -> Vec<CosetRep> {
    let mut out: Vec<CosetRep> = Vec::new();
    for (ball, _) in f.cells() {
        let support = Ball::new(&ball.center_padic(), -gamma).expect("exact center");
        let coset = support
            .center_padic()
            .shifted(gamma)
            .coset_rep()
            .expect("exact");
        if !out.contains(&coset) {
            out.push(coset);
        }
    }
    out.sort_by(coset_order);
    out
}

/// Computes every support-localized coefficient of `f` with `gamma` in
/// `[gamma_min, gamma_max]`. Scales finer than the local constancy of `f`
/// (`gamma <= membership scale`) are clipped away: their coefficients
/// vanish because each such wavelet integrates a constant region against a
/// mean-zero profile.
pub fn coefficient_table(
    f: &SchwartzFunction,
    gamma_min: i64,
    gamma_max: i64,
) -> Result<CoefficientTable> {
    let canon = f.canonicalize();
    let lo = if canon.is_empty() {
        gamma_max + 1
    } else {
        gamma_min.max(1 - canon.scale())
    };
    let mut entries = Vec::new();
    for gamma in lo..=gamma_max {
        for n in support_cosets(&canon, gamma) {
            for j in 1..canon.prime() {
                let index = WaveletIndex::new(gamma, n.clone(), j)?;
                let coeff = discrete_coefficient(&canon, &index)?;
                entries.push((index, coeff));
            }
        }
    }
    Ok(CoefficientTable {
        entries,
        gamma_range: (lo, gamma_max),
    })
}

/// Result of a windowed reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// `sum c_{gamma,n,j} psi_{gamma,n,j}` over the window.
    pub approximation: SchwartzFunction,
    /// `||f||^2 - sum |c|^2`: the orthogonal residual of the window.
    pub residual_norm_sq: f64,
    /// Whether the window contains every index that can carry a nonzero
    /// coefficient of the mean-zero part of `f`.
    pub covered: bool,
    /// For `integral f != 0`, the analytic energy `|integral f|^2 p^-gamma_max`
    /// of the coefficients above the window; zero for mean-zero `f`. `None`
    /// when the window stops below the support radius and the closed form
    /// does not apply.
    pub analytic_tail: Option<f64>,
}

/// Expands `f` over the wavelets with `gamma` in `[gamma_min, gamma_max]`
/// and reports the Parseval residual together with window diagnostics.
pub fn reconstruct_partial(
    f: &SchwartzFunction,
    gamma_min: i64,
    gamma_max: i64,
) -> Result<Reconstruction> {
    let p = f.prime();
    let table = coefficient_table(f, gamma_min, gamma_max)?;
    let canon = f.canonicalize();
    // accumulate at the finest wavelet scale in the window
    let target_scale = 1 - table.gamma_range.0.min(gamma_max);
    let mut approx = SchwartzFunction::empty(p, target_scale);
    for (index, coeff) in &table.entries {
        if *coeff == Complex64::ZERO {
            continue;
        }
        let w = basis_wavelet(index)
            .refine_to_scale(target_scale)?
            .scaled(*coeff);
        approx = approx.add(&w)?;
    }
    let energy = table.energy();
    let residual_norm_sq = canon.norm_sq() - energy;
    let membership = if canon.is_empty() {
        None
    } else {
        Some(-canon.scale())
    };
    let radius = canon.support_radius_exponent();
    let covered = match (membership, radius) {
        (Some(m), Some(r)) => gamma_min <= m + 1 && gamma_max >= r,
        _ => true,
    };
    let mean = canon.integral();
    let analytic_tail = if mean == Complex64::ZERO {
        Some(0.0)
    } else {
        match radius {
            Some(r) if gamma_max >= r => Some(mean.norm_sqr() * prime_power_f64(p, -gamma_max)),
            _ => None,
        }
    };
    Ok(Reconstruction {
        approximation: approx,
        residual_norm_sq,
        covered,
        analytic_tail,
    })
}
