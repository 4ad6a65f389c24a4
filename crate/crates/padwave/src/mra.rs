//! The multiresolution filtration of `L^2(Q_p)`.
//!
//! `V_gamma` is the closure of the locally constant compactly supported
//! functions whose diameter of local constancy is `p^gamma`; in cell terms,
//! the functions representable at scale `-gamma`. The filtration is
//! decreasing in `gamma`, the dilation by `p` moves `V_gamma` to
//! `V_(gamma-1)`, translations by cosets of `Z_p` preserve `V_0`, and the
//! translates of the unit-ball indicator form an orthonormal basis of
//! `V_0`. The detail space `W_gamma` (orthogonal complement of `V_gamma`
//! in `V_(gamma-1)`) is spanned by the scale-`gamma` wavelets.
//!
//! Density and trivial intersection are infinite-dimensional statements;
//! they are verified through exact finite surrogates: projection acts as
//! the identity exactly once the scale reaches the local constancy of the
//! argument, and the projection onto coarse scales collapses to the single
//! cell carrying `integral f`, whose energy `|integral f|^2 p^-gamma`
//! vanishes as `gamma` grows.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::padic::{CosetRep, PAdic};
use crate::schwartz::{prime_power_f64, Ball, SchwartzFunction};
use crate::wavelets::{basis_wavelet, discrete_coefficient, support_cosets, WaveletIndex};

/// The largest `gamma` with `f` in `V_gamma`: the local constancy exponent,
/// read off the maximally merged representation. `None` for the zero
/// function, which lies in every `V_gamma`.
pub fn membership_scale(f: &SchwartzFunction) -> Option<i64> {
    if f.is_empty() {
        None
    } else {
        Some(-f.canonicalize().scale())
    }
}

/// Orthogonal projection onto `V_gamma`: averages `f` over each ball of
/// radius `p^gamma` meeting the support. When `f` already lies in
/// `V_gamma` the canonical representation is returned unchanged, so the
/// identity case is exact at the representation level.
pub fn project(f: &SchwartzFunction, gamma: i64) -> SchwartzFunction {
    let canon = f.canonicalize();
    let target = -gamma;
    if target >= canon.scale() || canon.is_empty() {
        return canon;
    }
    let p = canon.prime();
    let cell_measure = prime_power_f64(p, -canon.scale());
    let inv_target_measure = prime_power_f64(p, -gamma);
    let mut acc: std::collections::BTreeMap<Ball, Complex64> = std::collections::BTreeMap::new();
    for (ball, value) in canon.cells() {
        let ancestor = Ball::new(&ball.center_padic(), target).expect("exact center");
        *acc.entry(ancestor).or_insert(Complex64::ZERO) += value * cell_measure;
    }
    let cells = acc
        .into_iter()
        .map(|(ball, integral)| (ball, integral * inv_target_measure))
        .filter(|(_, v)| *v != Complex64::ZERO);
    SchwartzFunction::from_cells(p, target, cells).expect("ancestors are disjoint")
}

/// The component of `f` in the detail space `W_gamma`:
/// `project(f, gamma-1) - project(f, gamma)`.
pub fn detail_component(f: &SchwartzFunction, gamma: i64) -> Result<SchwartzFunction> {
    project(f, gamma - 1).sub(&project(f, gamma))
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    pub cases: usize,
    pub max_error: f64,
    pub witness: Option<String>,
}

/// Per-axiom verification report; a failed check carries a witness
/// describing the function and scale that broke it.
#[derive(Debug, Clone, Serialize)]
pub struct MraReport {
    pub prime: u32,
    pub gamma_min: i64,
    pub gamma_max: i64,
    pub checks: Vec<AxiomCheck>,
}

impl MraReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn describe(f: &SchwartzFunction, gamma: i64) -> String {
    format!(
        "function with {} cells at scale {}, gamma={}",
        f.num_cells(),
        f.scale(),
        gamma
    )
}

/// Runs the six filtration checks on the given functions over
/// `[gamma_min, gamma_max]`: nesting, the scaling law, the translation law,
/// orthonormality of the generator translates, and the density and
/// trivial-intersection surrogates.
pub fn axiom_report(
    functions: &[SchwartzFunction],
    p: u32,
    gamma_min: i64,
    gamma_max: i64,
) -> Result<MraReport> {
    let mut checks = Vec::new();

    // nesting: projections at or below the membership scale act as the
    // identity, and refining the representation does not move the scale
    {
        let mut cases = 0;
        let mut worst = 0.0f64;
        let mut witness = None;
        for f in functions {
            let Some(star) = membership_scale(f) else {
                continue;
            };
            let refined = f.refine_to_scale(f.scale() + 2)?;
            if membership_scale(&refined) != Some(star) {
                witness = witness.or_else(|| Some(describe(f, star)));
                worst = worst.max(1.0);
            }
            for gamma in gamma_min..=star.min(gamma_max) {
                cases += 1;
                let d = project(f, gamma).sup_distance(f)?;
                if d > 0.0 {
                    worst = worst.max(d);
                    witness = witness.or_else(|| Some(describe(f, gamma)));
                }
            }
        }
        checks.push(AxiomCheck {
            axiom: "nesting".into(),
            passed: witness.is_none(),
            cases,
            max_error: worst,
            witness,
        });
    }

    // scaling law: dilation by p shifts membership down by exactly one
    {
        let mut cases = 0;
        let mut witness = None;
        let dilation = PAdic::from_u64(p, p as u64)?;
        for f in functions {
            let Some(star) = membership_scale(f) else {
                continue;
            };
            cases += 1;
            let g = f.affine_image(&dilation, &PAdic::exact_zero(p)?)?;
            if membership_scale(&g) != Some(star - 1) {
                witness = witness.or_else(|| Some(describe(f, star)));
            }
        }
        checks.push(AxiomCheck {
            axiom: "scaling".into(),
            passed: witness.is_none(),
            cases,
            max_error: if witness.is_none() { 0.0 } else { 1.0 },
            witness,
        });
    }

    // translation law: translating by a coset of Z_p preserves membership
    {
        let mut cases = 0;
        let mut witness = None;
        let one = PAdic::from_u64(p, 1)?;
        for f in functions {
            let Some(star) = membership_scale(f) else {
                continue;
            };
            for n_idx in 0..6u64 {
                cases += 1;
                let shift = CosetRep::from_index(p, n_idx).to_padic();
                let g = f.affine_image(&one, &shift)?;
                if membership_scale(&g) != Some(star) {
                    witness = witness.or_else(|| Some(describe(f, star)));
                }
            }
        }
        checks.push(AxiomCheck {
            axiom: "translation".into(),
            passed: witness.is_none(),
            cases,
            max_error: if witness.is_none() { 0.0 } else { 1.0 },
            witness,
        });
    }

    // orthonormal generator: translates of the unit-ball indicator
    {
        let mut cases = 0;
        let mut worst = 0.0f64;
        let mut witness = None;
        let translates: Vec<SchwartzFunction> = (0..8u64)
            .map(|i| {
                SchwartzFunction::indicator(
                    &Ball::new(&CosetRep::from_index(p, i).to_padic(), 0).expect("exact"),
                )
            })
            .collect();
        for (i, a) in translates.iter().enumerate() {
            for (k, b) in translates.iter().enumerate() {
                cases += 1;
                let got = a.inner_product(b)?;
                let want = if i == k {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                let err = (got - want).norm();
                if err > 0.0 {
                    worst = worst.max(err);
                    witness = witness.or_else(|| Some(format!("translates {i} and {k}")));
                }
            }
        }
        checks.push(AxiomCheck {
            axiom: "orthonormal-generator".into(),
            passed: witness.is_none(),
            cases,
            max_error: worst,
            witness,
        });
    }

    // density surrogate: projection is exactly the identity once the scale
    // reaches the membership scale
    {
        let mut cases = 0;
        let mut witness = None;
        for f in functions {
            let Some(star) = membership_scale(f) else {
                continue;
            };
            cases += 1;
            let projected = project(f, star);
            if projected != f.canonicalize() {
                witness = witness.or_else(|| Some(describe(f, star)));
            }
        }
        checks.push(AxiomCheck {
            axiom: "density-surrogate".into(),
            passed: witness.is_none(),
            cases,
            max_error: if witness.is_none() { 0.0 } else { 1.0 },
            witness,
        });
    }

    // trivial-intersection surrogate: strictly beyond the support radius
    // the projection collapses to the single cell carrying the integral,
    // and its energy |integral f|^2 p^-gamma decays to zero. Past the
    // radius every cell averages into the same zero-centered ball, so the
    // projected value is the same float expression as integral * p^-gamma
    // and the comparison is exact.
    {
        let mut cases = 0;
        let mut worst = 0.0f64;
        let mut witness = None;
        for f in functions {
            let Some(radius) = f.support_radius_exponent() else {
                continue;
            };
            let mean = f.canonicalize().integral();
            for extra in 1..=3i64 {
                let gamma = radius + extra;
                cases += 1;
                let projected = project(f, gamma);
                let expected_cell = mean * prime_power_f64(p, -gamma);
                let expected = if expected_cell == Complex64::ZERO {
                    SchwartzFunction::empty(p, -gamma)
                } else {
                    SchwartzFunction::from_cells(
                        p,
                        -gamma,
                        [(Ball::zero_centered(p, -gamma), expected_cell)],
                    )?
                };
                if projected != expected {
                    witness = witness.or_else(|| Some(describe(f, gamma)));
                    worst = worst.max(1.0);
                }
                let energy_err =
                    (projected.norm_sq() - mean.norm_sqr() * prime_power_f64(p, -gamma)).abs();
                if energy_err > 1e-12 {
                    worst = worst.max(energy_err);
                    witness = witness.or_else(|| Some(describe(f, gamma)));
                }
            }
        }
        checks.push(AxiomCheck {
            axiom: "trivial-intersection-surrogate".into(),
            passed: witness.is_none(),
            cases,
            max_error: worst,
            witness,
        });
    }

    Ok(MraReport {
        prime: p,
        gamma_min,
        gamma_max,
        checks,
    })
}

/// Compares the indicator `Omega(|p^gamma x - n|_p)` with the half-open
/// real indicator of the image interval at digit-reversed sample points;
/// returns the largest absolute difference (0 or 1 per sample).
pub fn indicator_correspondence<R: Rng>(
    gamma: i64,
    coset: &CosetRep,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let p = coset.prime();
    let ball = Ball::new(&coset.shifted_padic(gamma), -gamma)?;
    let interval = crate::monna::ball_image(&ball);
    let _ = p;
    let mut worst = 0.0f64;
    for x in crate::sampling::sample_points_around(rng, &ball, samples) {
        let lhs: f64 = if ball.contains(&x)? { 1.0 } else { 0.0 };
        let t = crate::monna::monna_map(&x)?;
        let rhs: f64 = if interval.contains(&t) { 1.0 } else { 0.0 };
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// The detail component expanded over the scale-`gamma` wavelets: checks
/// `detail_component(f, gamma)` against
/// `sum_{n,j} <psi_{gamma,n,j}, f> psi_{gamma,n,j}` on the
/// support-localized index set; returns the sup distance.
pub fn detail_wavelet_span_error(f: &SchwartzFunction, gamma: i64) -> Result<f64> {
    let canon = f.canonicalize();
    let detail = detail_component(&canon, gamma)?;
    if -gamma > canon.scale() {
        // wavelets finer than the constancy scale span nothing of f
        return Ok(detail.norm_sq().sqrt());
    }
    let p = canon.prime();
    let mut acc = SchwartzFunction::empty(p, 1 - gamma);
    for n in support_cosets(&canon, gamma) {
        for j in 1..p {
            let index = WaveletIndex::new(gamma, n.clone(), j)?;
            let coeff = discrete_coefficient(&canon, &index)?;
            if coeff != Complex64::ZERO {
                acc = acc.add(&basis_wavelet(&index).scaled(coeff))?;
            }
        }
    }
    detail.sup_distance(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelets::mother_wavelet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn parse(text: &str, p: u32) -> PAdic {
        PAdic::parse(text, p, 32).unwrap()
    }

    #[test]
    fn membership_scales() {
        for p in [2u32, 3, 5] {
            assert_eq!(membership_scale(&SchwartzFunction::omega(p)), Some(0));
            assert_eq!(membership_scale(&mother_wavelet(p).unwrap()), Some(-1));
            let fine = SchwartzFunction::indicator(&Ball::zero_centered(p, 1));
            assert_eq!(membership_scale(&fine), Some(-1));
            assert_eq!(membership_scale(&SchwartzFunction::empty(p, 0)), None);
            // refinement does not change local constancy
            let refined = SchwartzFunction::omega(p).refine_to_scale(2).unwrap();
            assert_eq!(membership_scale(&refined), Some(0));
        }
    }

    #[test]
    fn projecting_the_wavelet() {
        // averaging over unit balls kills the mean-zero wavelet; for p = 2
        // the cancellation is even exact in floating point
        let psi2 = mother_wavelet(2).unwrap();
        assert!(project(&psi2, 0).is_empty());
        let psi = mother_wavelet(3).unwrap();
        assert!(project(&psi, 0).norm_sq() < 1e-30);
        // the wavelet already lies in V_{-1}
        assert_eq!(project(&psi, -1), psi);
    }

    #[test]
    fn projection_energy_of_omega() {
        for p in [2u32, 3, 5] {
            let omega = SchwartzFunction::omega(p);
            for gamma in 0..=4i64 {
                let e = project(&omega, gamma).norm_sq();
                let want = prime_power_f64(p, -gamma);
                assert!((e - want).abs() < 1e-12, "p={p} gamma={gamma}: {e}");
            }
        }
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let f = crate::sampling::random_schwartz(&mut rng, 3, -2, 2, 9);
            let g = crate::sampling::random_schwartz(&mut rng, 3, -2, 2, 9);
            for gamma in [-1i64, 0, 2] {
                let pf = project(&f, gamma);
                assert_eq!(project(&pf, gamma), pf);
                let lhs = pf.inner_product(&g).unwrap();
                let rhs = f.inner_product(&project(&g, gamma)).unwrap();
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn detail_components() {
        let p = 3;
        let psi = mother_wavelet(p).unwrap();
        let d0 = detail_component(&psi, 0).unwrap();
        assert!(d0.sup_distance(&psi).unwrap() < 1e-15);

        let omega = SchwartzFunction::omega(p);
        assert!(detail_component(&omega, 0).unwrap().is_empty());

        let d1 = detail_component(&omega, 1).unwrap();
        let want = (p as f64 - 1.0) / p as f64;
        assert!((d1.norm_sq() - want).abs() < 1e-12);

        // the detail lies in W_1: orthogonal to the V_1 generators, the
        // indicators of radius-p balls
        for i in 0..6u64 {
            let gen = SchwartzFunction::indicator(
                &Ball::new(&CosetRep::from_index(p, i).to_padic().shifted(-1), -1).unwrap(),
            );
            let ip = d1.inner_product(&gen).unwrap();
            assert!(ip.norm() < 1e-12);
        }
    }

    #[test]
    fn detail_equals_wavelet_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for p in [2u32, 3] {
            for _ in 0..20 {
                let f = crate::sampling::random_schwartz(&mut rng, p, -1, 2, 8);
                let canon = f.canonicalize();
                let star = membership_scale(&canon).unwrap();
                let radius = canon.support_radius_exponent().unwrap();
                for gamma in (star + 1)..=radius.max(star + 1) {
                    let err = detail_wavelet_span_error(&f, gamma).unwrap();
                    assert!(err < 1e-12, "p={p} gamma={gamma}: {err}");
                }
            }
        }
    }

    #[test]
    fn pythagoras_across_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = crate::sampling::random_schwartz(&mut rng, 2, -1, 2, 8);
            let star = membership_scale(&f).unwrap();
            let hi = f.support_radius_exponent().unwrap() + 2;
            let mut total = project(&f, hi).norm_sq();
            for gamma in (star + 1)..=hi {
                total += detail_component(&f, gamma).unwrap().norm_sq();
            }
            assert!(
                (total - f.norm_sq()).abs() < 1e-12,
                "{total} vs {}",
                f.norm_sq()
            );
        }
    }

    #[test]
    fn standard_generator_set_passes_axioms() {
        for p in [2u32, 3, 5] {
            let mut set = vec![SchwartzFunction::omega(p), mother_wavelet(p).unwrap()];
            for i in 1..4u64 {
                set.push(SchwartzFunction::indicator(
                    &Ball::new(&CosetRep::from_index(p, i).to_padic(), 0).unwrap(),
                ));
            }
            let report = axiom_report(&set, p, -3, 3).unwrap();
            assert!(report.all_passed(), "{:?}", report);
        }
    }

    #[test]
    fn random_functions_pass_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for p in [2u32, 3] {
            let set: Vec<SchwartzFunction> = (0..40)
                .map(|_| crate::sampling::random_schwartz(&mut rng, p, -2, 2, 10))
                .collect();
            let report = axiom_report(&set, p, -3, 3).unwrap();
            assert!(report.all_passed(), "{:?}", report);
        }
    }

    #[test]
    fn indicator_correspondence_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // unit ball
        let err = indicator_correspondence(0, &CosetRep::zero(2), 200, &mut rng).unwrap();
        assert_eq!(err, 0.0);
        // gamma = 1, n = 1/2: support maps to [2, 4)
        let coset = parse("1/2", 2).coset_rep().unwrap();
        let ball = Ball::new(&coset.shifted_padic(1), -1).unwrap();
        let img = crate::monna::ball_image(&ball);
        assert_eq!(img.left, num_rational::BigRational::from_integer(2.into()));
        assert_eq!(
            img.right(),
            num_rational::BigRational::from_integer(4.into())
        );
        let err = indicator_correspondence(1, &coset, 200, &mut rng).unwrap();
        assert_eq!(err, 0.0);
        // a sample far outside has both sides zero
        let x = parse("1/16", 2);
        assert!(!ball.contains(&x).unwrap());
        assert!(!img.contains(&crate::monna::monna_map(&x).unwrap()));
    }
}
