//! Classification of angles whose cosine is rational.
//!
//! An angle that is a rational multiple of π and has a rational cosine has
//! cosine in {−1, −1/2, 0, 1/2, 1}. This module classifies rational cosines
//! against that list, evaluates `cos(kα)` exactly through the Chebyshev
//! recurrence, and exposes the strictly growing 2-adic denominators of
//! `cos(kα)` when `cos α = u / 2^p` with `p ≥ 2`.

use std::fmt;

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, as_perfect_square, rational, rational_int, Integer, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AngleTag {
    Zero,
    PiOver3,
    PiOver2,
    TwoPiOver3,
    Pi,
    NotCommensurable,
}

impl AngleTag {
    pub const COMMENSURABLE: [AngleTag; 5] = [
        AngleTag::Zero,
        AngleTag::PiOver3,
        AngleTag::PiOver2,
        AngleTag::TwoPiOver3,
        AngleTag::Pi,
    ];

    pub fn is_commensurable(self) -> bool {
        self != AngleTag::NotCommensurable
    }

    /// Cosine of the tagged angle, or `None` for [`AngleTag::NotCommensurable`].
    pub fn cosine(self) -> Option<Rational> {
        Some(match self {
            AngleTag::Zero => rational_int(1),
            AngleTag::PiOver3 => rational(1, 2),
            AngleTag::PiOver2 => rational_int(0),
            AngleTag::TwoPiOver3 => rational(-1, 2),
            AngleTag::Pi => rational_int(-1),
            AngleTag::NotCommensurable => return None,
        })
    }

    /// The angle as `(m, n)` with value `mπ/n`, for the commensurable tags.
    pub fn as_pi_fraction(self) -> Option<(u64, u64)> {
        Some(match self {
            AngleTag::Zero => (0, 1),
            AngleTag::PiOver3 => (1, 3),
            AngleTag::PiOver2 => (1, 2),
            AngleTag::TwoPiOver3 => (2, 3),
            AngleTag::Pi => (1, 1),
            AngleTag::NotCommensurable => return None,
        })
    }
}

impl fmt::Display for AngleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A classified rational cosine. `witness_cos` is the cosine that was
/// classified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngleClass {
    pub tag: AngleTag,
    #[serde(with = "kernel::serde_exact::rat")]
    pub witness_cos: Rational,
}

pub fn classify_cos(r: &Rational) -> Result<AngleClass> {
    if r.abs() > rational_int(1) {
        return Err(Error::Domain(format!(
            "{} is not a cosine",
            kernel::format_rational(r)
        )));
    }
    let tag = AngleTag::COMMENSURABLE
        .into_iter()
        .find(|tag| tag.cosine().as_ref() == Some(r))
        .unwrap_or(AngleTag::NotCommensurable);
    Ok(AngleClass {
        tag,
        witness_cos: r.clone(),
    })
}

/// Law of cosines: the cosine of the angle between sides `u` and `v`, opposite
/// side `w`.
pub fn cos_from_sides(u: &Integer, v: &Integer, w: &Integer) -> Result<Rational> {
    if !u.is_positive() || !v.is_positive() {
        return Err(Error::Domain(format!(
            "sides adjacent to an angle must be positive, got {u} and {v}"
        )));
    }
    if w.is_negative() || w < &(u - v).abs() || w > &(u + v) {
        return Err(Error::Domain(format!(
            "({u}, {v}, {w}) violates the triangle inequality"
        )));
    }
    Ok(Rational::new(
        u * u + v * v - w * w,
        Integer::from(2) * u * v,
    ))
}

/// Cosine of an angle given by squared side lengths. It is rational exactly
/// when the product of the adjacent squares is a perfect square or the
/// numerator vanishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cosine {
    Rational(Rational),
    /// `numerator / sqrt(radicand)` with a non-square radicand.
    Surd {
        numerator: Integer,
        radicand: Integer,
    },
}

impl Cosine {
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Cosine::Rational(r) => Some(r),
            Cosine::Surd { .. } => None,
        }
    }
}

impl fmt::Display for Cosine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cosine::Rational(r) => f.write_str(&kernel::format_rational(r)),
            Cosine::Surd {
                numerator,
                radicand,
            } => write!(f, "{numerator}/sqrt({radicand})"),
        }
    }
}

pub fn cos_from_squared_sides(u_sq: &Integer, v_sq: &Integer, w_sq: &Integer) -> Result<Cosine> {
    if !u_sq.is_positive() || !v_sq.is_positive() || w_sq.is_negative() {
        return Err(Error::Domain(format!(
            "squared sides ({u_sq}, {v_sq}, {w_sq}) do not bound an angle"
        )));
    }
    let numerator = u_sq + v_sq - w_sq;
    let radicand = Integer::from(4) * u_sq * v_sq;
    if &numerator * &numerator > radicand {
        return Err(Error::Domain(format!(
            "squared sides ({u_sq}, {v_sq}, {w_sq}) violate the triangle inequality"
        )));
    }
    if numerator.is_zero() {
        return Ok(Cosine::Rational(rational_int(0)));
    }
    Ok(match as_perfect_square(&radicand) {
        Some(root) => Cosine::Rational(Rational::new(numerator, root)),
        None => Cosine::Surd {
            numerator,
            radicand,
        },
    })
}

/// `cos(kα)` given `cos α = r`, i.e. the Chebyshev polynomial `T_k(r)`.
///
/// Runs the recurrence `N_{j+1} = 2h·N_j − d²·N_{j−1}` on numerators over the
/// common denominator `d^j` and normalizes once at the end.
pub fn cos_multiple(r: &Rational, k: u64) -> Rational {
    let (num, den) = (r.numer(), r.denom());
    if k == 0 {
        return rational_int(1);
    }
    let two_num = num * 2;
    let den_sq = den * den;
    let mut prev = Integer::one(); // N_0, over d^0
    let mut cur = num.clone(); // N_1, over d^1
    for _ in 1..k {
        let next = &two_num * &cur - &den_sq * &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    Rational::new(cur, num_traits::pow(den.clone(), k as usize))
}

/// Reduced denominators of `cos(kα)`, `k = 1..=n`, for `cos α = u / 2^p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DenominatorTrace {
    #[serde(with = "kernel::serde_exact::int")]
    pub u: Integer,
    pub p: u32,
    /// `b_k`: the exponent of the reduced denominator `2^{b_k}` of `cos(kα)`.
    pub valuations: Vec<u64>,
    /// `a_k`: the reduced numerator of `cos(kα)`.
    #[serde(skip)]
    pub numerators: Vec<Integer>,
    pub strictly_increasing: bool,
    pub numerators_odd: bool,
}

pub fn denominator_valuation_trace(u: &Integer, p: u32, n: usize) -> Result<DenominatorTrace> {
    if u.is_even() {
        return Err(Error::Domain(format!("numerator {u} must be odd")));
    }
    if p < 2 {
        return Err(Error::Domain(format!("exponent {p} must be at least 2")));
    }
    if n == 0 {
        return Err(Error::Domain("trace length must be at least 1".into()));
    }
    let den = Integer::one() << p;
    if u.abs() >= den {
        return Err(Error::Domain(format!("{u}/2^{p} is not a cosine")));
    }
    let cos_alpha = Rational::new(u.clone(), den);
    let two_cos = &cos_alpha * rational_int(2);
    let mut valuations = Vec::with_capacity(n);
    let mut numerators = Vec::with_capacity(n);
    let mut prev = rational_int(1);
    let mut cur = cos_alpha;
    for k in 1..=n {
        if k > 1 {
            let next = &two_cos * &cur - &prev;
            prev = std::mem::replace(&mut cur, next);
        }
        let den = cur.denom();
        // Denominators are powers of two; anything else is a bug upstream.
        let b = kernel::two_adic_valuation(den).unwrap_or(0);
        if den != &(Integer::one() << b) {
            return Err(Error::Consistency(format!(
                "denominator {den} of cos({k}α) is not a power of two"
            )));
        }
        valuations.push(b);
        numerators.push(cur.numer().clone());
    }
    let strictly_increasing = valuations.windows(2).all(|w| w[1] > w[0]);
    let numerators_odd = numerators.iter().all(|a| a.is_odd());
    Ok(DenominatorTrace {
        u: u.clone(),
        p,
        valuations,
        numerators,
        strictly_increasing,
        numerators_odd,
    })
}

/// Classifies the three angles of an integer triangle. Entry `i` is the angle
/// between `sides[i]` and `sides[(i + 1) % 3]`.
pub fn diophantine_triangle_angle_filter(sides: &[Integer; 3]) -> Result<[AngleClass; 3]> {
    let [x, y, z] = sides;
    if !(x.is_positive() && y.is_positive() && z.is_positive())
        || x >= &(y + z)
        || y >= &(x + z)
        || z >= &(x + y)
    {
        return Err(Error::Domain(format!(
            "({x}, {y}, {z}) is not a nondegenerate triangle"
        )));
    }
    let classify = |u: &Integer, v: &Integer, w: &Integer| -> Result<AngleClass> {
        classify_cos(&cos_from_sides(u, v, w)?)
    };
    Ok([classify(x, y, z)?, classify(y, z, x)?, classify(z, x, y)?])
}

/// One angle `mπ/n` of the sweep whose cosine was confirmed rational.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepHit {
    pub m: u64,
    pub n: u64,
    #[serde(with = "kernel::serde_exact::rat")]
    pub cos: Rational,
    pub tag: AngleTag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CosineSweep {
    pub n_max: u64,
    pub angles_checked: u64,
    /// Angles decided from exactly known values (reduced denominator 1, 2, 3, 4 or 6).
    pub decided_exactly: u64,
    /// Numeric candidates that failed the exact `T_{2n}(r) = 1` test.
    pub candidates_rejected: u64,
    pub rational_hits: Vec<SweepHit>,
}

impl CosineSweep {
    /// Every rational cosine found is one of the five admissible values.
    pub fn confirms_classification(&self) -> bool {
        self.rational_hits
            .iter()
            .all(|hit| hit.tag.is_commensurable() && hit.tag.cosine().as_ref() == Some(&hit.cos))
    }
}

/// `cos(jπ/6)` for the multiples where it is rational.
fn cos_sixth_turn_multiple(j: u64) -> Option<Rational> {
    Some(match j % 12 {
        0 => rational_int(1),
        2 | 10 => rational(1, 2),
        3 | 9 => rational_int(0),
        4 | 8 => rational(-1, 2),
        6 => rational_int(-1),
        _ => return None,
    })
}

/// Best rational approximation with bounded denominator, by continued-fraction
/// convergents.
fn best_rational_approximation(x: f64, max_den: i64) -> (i64, i64) {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    loop {
        let a = v.floor();
        let ai = a as i64;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den {
            break;
        }
        (h0, h1) = (h1, h2);
        (k0, k1) = (k1, k2);
        let frac = v - a;
        if frac < 1e-18 {
            break;
        }
        v = 1.0 / frac;
    }
    (h1, k1)
}

pub const SWEEP_TOLERANCE: f64 = 1e-12;
pub const SWEEP_MAX_DENOMINATOR: i64 = 1_000_000;

/// Checks every angle `mπ/n` with `1 ≤ n ≤ n_max`, `0 ≤ m ≤ 2n` for a rational
/// cosine.
///
/// Reduced denominators 1, 2 and 3 use exact values; 4 and 6 are decided from
/// the exact `cos 2α` through `cos²α = (1 + cos 2α)/2`. Elsewhere the cosine
/// is approximated in floating point, the best rational with denominator at
/// most 10⁶ within 10⁻¹² becomes a candidate, and the candidate is confirmed
/// only if `T_{2n}(r) = 1` holds exactly.
pub fn rational_cosine_sweep(n_max: u64) -> Result<CosineSweep> {
    let mut sweep = CosineSweep {
        n_max,
        ..CosineSweep::default()
    };
    for n in 1..=n_max {
        for m in 0..=2 * n {
            sweep.angles_checked += 1;
            let g = num_integer::gcd(m, n);
            let (m_red, n_red) = (m / g, n / g);
            let found = match n_red {
                1..=3 => {
                    sweep.decided_exactly += 1;
                    cos_sixth_turn_multiple(6 * m_red / n_red)
                }
                4 | 6 => {
                    sweep.decided_exactly += 1;
                    // 2α = (2m/n)π reduces to denominator 1, 2 or 3.
                    let double = cos_sixth_turn_multiple(12 * m_red / n_red).ok_or_else(|| {
                        Error::Consistency(format!("cos(2·{m}π/{n}) not tabulated"))
                    })?;
                    let cos_sq = (rational_int(1) + double) / rational_int(2);
                    match (
                        as_perfect_square(cos_sq.numer()),
                        as_perfect_square(cos_sq.denom()),
                    ) {
                        (Some(num), Some(den)) => {
                            let magnitude = Rational::new(num, den);
                            let approx = (std::f64::consts::PI * m as f64 / n as f64).cos();
                            Some(if approx < 0.0 { -magnitude } else { magnitude })
                        }
                        _ => None,
                    }
                }
                _ => {
                    let approx = (std::f64::consts::PI * m as f64 / n as f64).cos();
                    let (h, k) = best_rational_approximation(approx, SWEEP_MAX_DENOMINATOR);
                    if (approx - h as f64 / k as f64).abs() < SWEEP_TOLERANCE {
                        let candidate = rational(h, k);
                        if cos_multiple(&candidate, 2 * n).is_one() {
                            Some(candidate)
                        } else {
                            sweep.candidates_rejected += 1;
                            None
                        }
                    } else {
                        None
                    }
                }
            };
            if let Some(cos) = found {
                if !cos_multiple(&cos, 2 * n).is_one() {
                    return Err(Error::Consistency(format!(
                        "cos({m}π/{n}) = {} fails T_2n = 1",
                        kernel::format_rational(&cos)
                    )));
                }
                let tag = classify_cos(&cos)?.tag;
                sweep.rational_hits.push(SweepHit { m, n, cos, tag });
            }
        }
    }
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(v: i64) -> Integer {
        Integer::from(v)
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_cos(&rational(1, 2)).unwrap().tag,
            AngleTag::PiOver3
        );
        assert_eq!(classify_cos(&rational_int(-1)).unwrap().tag, AngleTag::Pi);
        assert_eq!(
            classify_cos(&rational_int(0)).unwrap().tag,
            AngleTag::PiOver2
        );
        assert_eq!(
            classify_cos(&rational(-1, 2)).unwrap().tag,
            AngleTag::TwoPiOver3
        );
        assert_eq!(classify_cos(&rational_int(1)).unwrap().tag, AngleTag::Zero);
        let third = classify_cos(&rational(1, 3)).unwrap();
        assert_eq!(third.tag, AngleTag::NotCommensurable);
        assert_eq!(third.witness_cos, rational(1, 3));
        assert!(matches!(
            classify_cos(&rational(3, 2)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            classify_cos(&rational(-5, 4)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn law_of_cosines_examples() {
        assert_eq!(
            cos_from_sides(&int(3), &int(5), &int(7)).unwrap(),
            rational(-1, 2)
        );
        assert_eq!(
            cos_from_sides(&int(1), &int(1), &int(1)).unwrap(),
            rational(1, 2)
        );
        assert_eq!(
            cos_from_sides(&int(3), &int(4), &int(5)).unwrap(),
            rational_int(0)
        );
        // degenerate triangles are allowed
        assert_eq!(
            cos_from_sides(&int(2), &int(3), &int(5)).unwrap(),
            rational_int(-1)
        );
        assert!(cos_from_sides(&int(1), &int(1), &int(3)).is_err());
        assert!(cos_from_sides(&int(0), &int(1), &int(1)).is_err());
    }

    #[test]
    fn squared_sides_cosine() {
        // the square with p = 4 and M = (1, 2): ∠AMB
        let c = cos_from_squared_sides(&int(5), &int(5), &int(16)).unwrap();
        assert_eq!(c, Cosine::Rational(rational(-3, 5)));
        let c = cos_from_squared_sides(&int(2), &int(1), &int(1)).unwrap();
        assert!(matches!(c, Cosine::Surd { .. }));
        let c = cos_from_squared_sides(&int(2), &int(3), &int(5)).unwrap();
        assert_eq!(c, Cosine::Rational(rational_int(0)));
        assert!(cos_from_squared_sides(&int(1), &int(1), &int(5)).is_err());
    }

    #[test]
    fn cos_multiple_examples() {
        assert_eq!(cos_multiple(&rational(1, 2), 2), rational(-1, 2));
        assert_eq!(cos_multiple(&rational(1, 3), 2), rational(-7, 9));
        assert_eq!(cos_multiple(&rational(1, 3), 3), rational(-23, 27));
        assert_eq!(cos_multiple(&rational(1, 3), 0), rational_int(1));
        assert_eq!(cos_multiple(&rational(1, 3), 1), rational(1, 3));
    }

    #[test]
    fn full_turn_returns_to_one() {
        for tag in AngleTag::COMMENSURABLE {
            let (_, n) = tag.as_pi_fraction().unwrap();
            assert!(
                cos_multiple(&tag.cosine().unwrap(), 2 * n).is_one(),
                "{tag}"
            );
        }
    }

    #[test]
    fn trace_examples() {
        let t = denominator_valuation_trace(&int(1), 2, 3).unwrap();
        assert_eq!(t.valuations, vec![2, 3, 4]);
        assert_eq!(t.numerators, vec![int(1), int(-7), int(-11)]);
        assert!(t.strictly_increasing && t.numerators_odd);
        let t = denominator_valuation_trace(&int(3), 2, 2).unwrap();
        assert_eq!(t.valuations, vec![2, 3]);
        assert_eq!(t.numerators, vec![int(3), int(1)]);
        assert_eq!(
            denominator_valuation_trace(&int(1), 2, 1)
                .unwrap()
                .valuations,
            vec![2]
        );
    }

    #[test]
    fn trace_rejects_bad_hypotheses() {
        assert!(denominator_valuation_trace(&int(2), 3, 3).is_err());
        assert!(denominator_valuation_trace(&int(1), 1, 3).is_err());
        assert!(denominator_valuation_trace(&int(5), 2, 3).is_err());
        assert!(denominator_valuation_trace(&int(1), 2, 0).is_err());
    }

    #[test]
    fn triangle_angle_examples() {
        let tags = |s: [i64; 3]| {
            diophantine_triangle_angle_filter(&s.map(int))
                .unwrap()
                .map(|c| c.tag)
        };
        assert_eq!(tags([1, 1, 1]), [AngleTag::PiOver3; 3]);
        use AngleTag::NotCommensurable as N;
        assert_eq!(tags([3, 4, 5]), [AngleTag::PiOver2, N, N]);
        assert_eq!(tags([3, 5, 7]), [AngleTag::TwoPiOver3, N, N]);
        let classes = diophantine_triangle_angle_filter(&[3, 4, 5].map(int)).unwrap();
        assert_eq!(classes[1].witness_cos, rational(4, 5));
        assert_eq!(classes[2].witness_cos, rational(3, 5));
        assert!(diophantine_triangle_angle_filter(&[1, 2, 3].map(int)).is_err());
    }

    #[test]
    fn small_sweep() {
        let sweep = rational_cosine_sweep(12).unwrap();
        assert!(sweep.confirms_classification());
        let hits: Vec<_> = sweep
            .rational_hits
            .iter()
            .filter(|h| h.n == 3)
            .map(|h| h.tag)
            .collect();
        use AngleTag::*;
        assert_eq!(
            hits,
            vec![Zero, PiOver3, TwoPiOver3, Pi, TwoPiOver3, PiOver3, Zero]
        );
    }

    #[test]
    fn continued_fraction_recovers_simple_values() {
        assert_eq!(best_rational_approximation(0.75, 1000), (3, 4));
        assert_eq!(best_rational_approximation(-0.2, 1000), (-1, 5));
    }

    proptest! {
        #[test]
        fn classification_total_on_unit_interval(num in -1000i64..=1000, den in 1i64..=1000) {
            let r = rational(num, den);
            prop_assume!(r.abs() <= rational_int(1));
            let class = classify_cos(&r).unwrap();
            let listed = AngleTag::COMMENSURABLE.iter().any(|t| t.cosine().as_ref() == Some(&r));
            prop_assert_eq!(class.tag.is_commensurable(), listed);
        }

        #[test]
        fn valuations_grow(seed in 0u64..u64::MAX, p in 2u32..=6) {
            let bound = 1i64 << p;
            let u = (seed % bound as u64) as i64 * 2 + 1 - bound;
            prop_assume!(u.abs() < bound);
            let t = denominator_valuation_trace(&int(u), p, 30).unwrap();
            prop_assert!(t.strictly_increasing);
            prop_assert!(t.numerators_odd);
            prop_assert_eq!(t.valuations[0], p as u64);
            for w in t.valuations.windows(2) {
                prop_assert_eq!(w[1], w[0] + p as u64 - 1);
            }
        }

        #[test]
        fn recurrence_matches_rational_iteration(num in -50i64..=50, den in 1i64..=50, k in 0u64..12) {
            let r = rational(num, den);
            let (mut prev, mut cur) = (rational_int(1), r.clone());
            if k == 0 { cur = rational_int(1); }
            for _ in 1..k {
                let next = rational_int(2) * &r * &cur - &prev;
                prev = std::mem::replace(&mut cur, next);
            }
            prop_assert_eq!(cos_multiple(&r, k), cur);
        }
    }
}
