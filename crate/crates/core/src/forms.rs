//! Generators for `x² + xy + y² = z²` and Pythagorean triples, and bounded
//! exhaustive scans for the concordant pair `a² ± ab + b² = □` and the quartic
//! `a⁴ + a²b² + b⁴ = □`.
//!
//! Non-primitive solutions are multiples of primitive ones (divide through by
//! `gcd(a, b)²`), so the scans only visit coprime pairs.

use std::time::{Duration, Instant};

use num_integer::Integer as _;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, as_perfect_square, gcd, gcd_u64, square_root_u128, Integer};

/// A solution of `x² + xy + y² = z²` in positive integers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EisensteinTriple {
    #[serde(with = "kernel::serde_exact::int")]
    pub x: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub y: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub z: Integer,
    pub primitive: bool,
}

impl EisensteinTriple {
    pub fn satisfies_form(&self) -> bool {
        &self.x * &self.x + &self.x * &self.y + &self.y * &self.y == &self.z * &self.z
    }

    /// The same triple with `x ≤ y`.
    pub fn canonical(mut self) -> Self {
        if self.x > self.y {
            std::mem::swap(&mut self.x, &mut self.y);
        }
        self
    }
}

/// `scale · (t² − s², s² + 2st, s² + st + t²)` for `0 < s < t`.
pub fn gen_eisenstein(s: &Integer, t: &Integer, scale: &Integer) -> Result<EisensteinTriple> {
    if !s.is_positive() || s >= t {
        return Err(Error::Domain(format!(
            "need 0 < s < t, got s = {s}, t = {t}"
        )));
    }
    if !scale.is_positive() {
        return Err(Error::Domain(format!(
            "scale must be positive, got {scale}"
        )));
    }
    let x = scale * (t * t - s * s);
    let y = scale * (s * s + Integer::from(2) * s * t);
    let z = scale * (s * s + s * t + t * t);
    let primitive = gcd(&x, &y).is_one();
    let triple = EisensteinTriple { x, y, z, primitive };
    if !triple.satisfies_form() {
        return Err(Error::Consistency(format!(
            "generated {triple:?} fails the form"
        )));
    }
    Ok(triple)
}

/// All primitive triples with `z ≤ z_max`, `x ≤ y`, sorted by `(z, x)`.
///
/// Coprime parameters with `s ≡ t (mod 3)` yield three times a primitive
/// triple that another parameter pair already produces, so they are skipped.
pub fn enumerate_primitive_eisenstein(z_max: u64) -> Vec<EisensteinTriple> {
    let mut out = Vec::new();
    let mut t = 2u64;
    // z ≥ t² + t + 1 once s ≥ 1.
    while t * t + t < z_max {
        for s in 1..t {
            let z = s * s + s * t + t * t;
            if z > z_max {
                break;
            }
            if (t - s).is_multiple_of(3) || gcd_u64(s, t) != 1 {
                continue;
            }
            let x = t * t - s * s;
            let y = s * s + 2 * s * t;
            let (x, y) = if x <= y { (x, y) } else { (y, x) };
            out.push(EisensteinTriple {
                x: x.into(),
                y: y.into(),
                z: z.into(),
                primitive: true,
            });
        }
        t += 1;
    }
    out.sort_by(|l, r| (&l.z, &l.x).cmp(&(&r.z, &r.x)));
    out
}

/// Primitive Pythagorean triple `(m² − n², 2mn, m² + n²)`.
pub fn gen_pythagorean(m: &Integer, n: &Integer) -> Result<(Integer, Integer, Integer)> {
    if !n.is_positive() || m <= n {
        return Err(Error::Domain(format!(
            "need m > n ≥ 1, got m = {m}, n = {n}"
        )));
    }
    if !gcd(m, n).is_one() {
        return Err(Error::Domain(format!(
            "m = {m} and n = {n} are not coprime"
        )));
    }
    let mn = m * n;
    if mn.is_odd() {
        return Err(Error::Domain(format!("m·n = {mn} is odd")));
    }
    Ok((m * m - n * n, Integer::from(2) * mn, m * m + n * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormEquation {
    /// `a² + ab + b² = p²` and `a² − ab + b² = c²` simultaneously.
    ConcordantPair,
    /// `a⁴ + a²b² + b⁴ = (pc)²`.
    QuarticNorm,
    /// `p₁⁴ + p₁²q² + q⁴ = d²` with `p₁ > q`.
    InnerQuartic,
    /// Full square configurations with a right angle at the point.
    RightAngleSquare,
}

/// A pair `(a, b)` for which the scanned equation holds, with the square roots
/// that witness it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FormSolution {
    #[serde(with = "kernel::serde_exact::int")]
    pub a: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub b: Integer,
    #[serde(with = "int_list")]
    pub roots: Vec<Integer>,
}

mod int_list {
    use super::Integer;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(values: &[Integer], s: S) -> Result<S::Ok, S::Error> {
        values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Integer>, D::Error> {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|t| t.parse().map_err(D::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormScanCertificate {
    pub equation: FormEquation,
    pub bound: u64,
    pub solutions_found: Vec<FormSolution>,
    pub elapsed: Duration,
    pub enumerated_count: u64,
}

impl FormScanCertificate {
    /// No solution exists up to the bound.
    pub fn certifies_absence(&self) -> bool {
        self.solutions_found.is_empty()
    }
}

pub fn concordant_pair_roots(a: &Integer, b: &Integer) -> Option<(Integer, Integer)> {
    let (sq_a, sq_b, ab) = (a * a, b * b, a * b);
    let plus = as_perfect_square(&(&sq_a + &ab + &sq_b))?;
    let minus = as_perfect_square(&(sq_a - ab + sq_b))?;
    Some((plus, minus))
}

pub fn quartic_norm(a: &Integer, b: &Integer) -> Integer {
    let (sq_a, sq_b) = (a * a, b * b);
    &sq_a * &sq_a + &sq_a * &sq_b + &sq_b * &sq_b
}

fn concordant_fast(a: u64, b: u64) -> Option<Vec<Integer>> {
    let (a, b) = (a as u128, b as u128);
    let fast = || -> Option<(u128, u128)> {
        let sq = a.checked_mul(a)?.checked_add(b.checked_mul(b)?)?;
        let ab = a.checked_mul(b)?;
        Some((sq.checked_add(ab)?, sq - ab))
    };
    match fast() {
        Some((plus, minus)) => {
            // The minus form is smaller and rejects most pairs first.
            let c = square_root_u128(minus)?;
            let p = square_root_u128(plus)?;
            Some(vec![p.into(), c.into()])
        }
        None => concordant_pair_roots(&a.into(), &b.into()).map(|(p, c)| vec![p, c]),
    }
}

fn quartic_fast(a: u64, b: u64) -> Option<Vec<Integer>> {
    let (a, b) = (a as u128, b as u128);
    let fast = || -> Option<u128> {
        let sa = a.checked_mul(a)?;
        let sb = b.checked_mul(b)?;
        sa.checked_mul(sa)?
            .checked_add(sa.checked_mul(sb)?)?
            .checked_add(sb.checked_mul(sb)?)
    };
    match fast() {
        Some(value) => square_root_u128(value).map(|r| vec![r.into()]),
        None => as_perfect_square(&quartic_norm(&a.into(), &b.into())).map(|r| vec![r]),
    }
}

/// Visits coprime `1 ≤ a ≤ b ≤ bound` (or `a < b` when `strict`), splitting
/// the outer loop on `b` across the rayon pool. Hits come back sorted.
fn scan_coprime_pairs<F>(bound: u64, strict: bool, test: F) -> (Vec<FormSolution>, u64)
where
    F: Fn(u64, u64) -> Option<Vec<Integer>> + Sync,
{
    let (mut hits, counts): (Vec<Vec<FormSolution>>, Vec<u64>) = (1..=bound)
        .into_par_iter()
        .map(|b| {
            let mut found = Vec::new();
            let mut visited = 0u64;
            let top = if strict { b - 1 } else { b };
            for a in 1..=top {
                if gcd_u64(a, b) != 1 {
                    continue;
                }
                visited += 1;
                if let Some(roots) = test(a, b) {
                    found.push(FormSolution {
                        a: a.into(),
                        b: b.into(),
                        roots,
                    });
                }
            }
            (found, visited)
        })
        .unzip();
    let mut flat: Vec<FormSolution> = hits.drain(..).flatten().collect();
    flat.sort();
    (flat, counts.into_iter().sum())
}

fn certify<F>(equation: FormEquation, bound: u64, strict: bool, test: F) -> FormScanCertificate
where
    F: Fn(u64, u64) -> Option<Vec<Integer>> + Sync,
{
    let start = Instant::now();
    let (solutions_found, enumerated_count) = scan_coprime_pairs(bound, strict, test);
    FormScanCertificate {
        equation,
        bound,
        solutions_found,
        elapsed: start.elapsed(),
        enumerated_count,
    }
}

/// Coprime `1 ≤ a ≤ b ≤ bound` with both `a² ± ab + b²` perfect squares.
pub fn scan_concordant_pair(bound: u64) -> FormScanCertificate {
    certify(FormEquation::ConcordantPair, bound, false, concordant_fast)
}

/// Coprime `1 ≤ a ≤ b ≤ bound` with `a⁴ + a²b² + b⁴` a perfect square.
pub fn scan_quartic_norm(bound: u64) -> FormScanCertificate {
    certify(FormEquation::QuarticNorm, bound, false, quartic_fast)
}

/// Coprime `1 ≤ q < p₁ ≤ bound` with `p₁⁴ + p₁²q² + q⁴` a perfect square.
/// Solutions are reported as `a = q`, `b = p₁`.
pub fn scan_inner_quartic(bound: u64) -> FormScanCertificate {
    certify(FormEquation::InnerQuartic, bound, true, quartic_fast)
}

/// Re-checks a reported solution against its equation.
pub fn solution_holds(equation: FormEquation, solution: &FormSolution) -> bool {
    let (a, b) = (&solution.a, &solution.b);
    match equation {
        FormEquation::ConcordantPair => {
            concordant_pair_roots(a, b).is_some_and(|(p, c)| solution.roots == [p, c])
        }
        FormEquation::QuarticNorm | FormEquation::InnerQuartic => {
            solution.roots.len() == 1
                && &solution.roots[0] * &solution.roots[0] == quartic_norm(a, b)
        }
        FormEquation::RightAngleSquare => match solution.roots.as_slice() {
            // a = c and b = d, roots = [p, b, a]
            [p, dist_b, dist_a] => {
                a * a + b * b == p * p
                    && crate::square::SquareConfig::from_distances(p, dist_a, dist_b, a, b)
                        .is_exact()
            }
            _ => false,
        },
    }
}
