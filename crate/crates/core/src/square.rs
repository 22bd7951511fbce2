//! Integer-sided squares with a plane point at integer distances from the
//! vertices.
//!
//! Frame: `A = (0, 0)`, `B = (0, p)`, `C = (p, p)`, `D = (p, 0)`. The point
//! `M = (x, y)` is at distances `a, b, c, d` from `A, B, C, D`. Subtracting the
//! circle equations gives
//!
//! ```text
//! x = (p² + a² − d²) / 2p        y = (p² + a² − b²) / 2p
//! ```
//!
//! and the remaining equation `x² + y² = a²` becomes
//! `(p² + a² − b²)² + (p² + a² − d²)² = (2pa)²`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::{self, AngleClass, AngleTag, Cosine};
use crate::error::{Error, Result};
use crate::forms::{FormEquation, FormScanCertificate, FormSolution};
use crate::kernel::{self, as_perfect_square, rational_int, square_root_i128, Integer, Rational};

/// Candidate configuration, stored by squared distances so that points with
/// irrational distances are representable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareConfig {
    pub p: Integer,
    pub a_sq: Integer,
    pub b_sq: Integer,
    pub c_sq: Integer,
    pub d_sq: Integer,
}

impl SquareConfig {
    pub fn from_distances(p: &Integer, a: &Integer, b: &Integer, c: &Integer, d: &Integer) -> Self {
        Self::from_squared(p, &(a * a), &(b * b), &(c * c), &(d * d))
    }

    pub fn from_squared(
        p: &Integer,
        a_sq: &Integer,
        b_sq: &Integer,
        c_sq: &Integer,
        d_sq: &Integer,
    ) -> Self {
        Self {
            p: p.clone(),
            a_sq: a_sq.clone(),
            b_sq: b_sq.clone(),
            c_sq: c_sq.clone(),
            d_sq: d_sq.clone(),
        }
    }

    pub fn point(&self) -> Result<(Rational, Rational)> {
        point_from_squared(&self.p, &self.a_sq, &self.b_sq, &self.d_sq)
    }

    /// Residuals of the four circle equations at the derived point, in the
    /// order A, B, C, D.
    pub fn point_residuals(&self) -> Result<[Rational; 4]> {
        let (x, y) = self.point()?;
        let p = rational_int(self.p.clone());
        let sq = |r: &Rational| r * r;
        Ok([
            sq(&x) + sq(&y) - rational_int(self.a_sq.clone()),
            sq(&x) + sq(&(&p - &y)) - rational_int(self.b_sq.clone()),
            sq(&(&x - &p)) + sq(&(&y - &p)) - rational_int(self.c_sq.clone()),
            sq(&(&x - &p)) + sq(&y) - rational_int(self.d_sq.clone()),
        ])
    }

    /// Integer distances, when every squared distance is a perfect square.
    pub fn distances(&self) -> Option<[Integer; 4]> {
        Some([
            as_perfect_square(&self.a_sq)?,
            as_perfect_square(&self.b_sq)?,
            as_perfect_square(&self.c_sq)?,
            as_perfect_square(&self.d_sq)?,
        ])
    }

    /// All four circle equations hold and all four distances are integers.
    pub fn is_exact(&self) -> bool {
        self.distances().is_some()
            && self
                .point_residuals()
                .is_ok_and(|r| r.iter().all(Zero::is_zero))
    }
}

pub fn point_from_distances(
    p: &Integer,
    a: &Integer,
    b: &Integer,
    d: &Integer,
) -> Result<(Rational, Rational)> {
    point_from_squared(p, &(a * a), &(b * b), &(d * d))
}

fn point_from_squared(
    p: &Integer,
    a_sq: &Integer,
    b_sq: &Integer,
    d_sq: &Integer,
) -> Result<(Rational, Rational)> {
    if !p.is_positive() {
        return Err(Error::Domain(format!(
            "side length must be positive, got {p}"
        )));
    }
    let two_p = Integer::from(2) * p;
    let base = p * p + a_sq;
    Ok((
        Rational::new(&base - d_sq, two_p.clone()),
        Rational::new(base - b_sq, two_p),
    ))
}

/// LHS − RHS of the four eliminated equations, one per vertex, in the order
/// A, B, D, C.
pub fn config_residuals(cfg: &SquareConfig) -> [Integer; 4] {
    let p_sq = &cfg.p * &cfg.p;
    let four_p_sq = Integer::from(4) * &p_sq;
    let eq = |own: &Integer, left: &Integer, right: &Integer| -> Integer {
        let l = &p_sq + own - left;
        let r = &p_sq + own - right;
        &l * &l + &r * &r - &four_p_sq * own
    };
    [
        eq(&cfg.a_sq, &cfg.b_sq, &cfg.d_sq),
        eq(&cfg.b_sq, &cfg.a_sq, &cfg.c_sq),
        eq(&cfg.d_sq, &cfg.a_sq, &cfg.c_sq),
        eq(&cfg.c_sq, &cfg.d_sq, &cfg.b_sq),
    ]
}

/// `a² + c² − b² − d²`; zero for every point and every rectangle.
pub fn british_flag_defect(a: &Integer, b: &Integer, c: &Integer, d: &Integer) -> Integer {
    a * a + c * c - b * b - d * d
}

fn squared_flag_defect(cfg: &SquareConfig) -> Integer {
    &cfg.a_sq + &cfg.c_sq - &cfg.b_sq - &cfg.d_sq
}

/// One emitted configuration of [`scan_squares`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareRecord {
    #[serde(with = "kernel::serde_exact::int")]
    pub p: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub a: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub b: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub d: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub c_squared: Integer,
    pub exact: bool,
    pub collinear: bool,
    #[serde(with = "kernel::serde_exact::rat")]
    pub x: Rational,
    #[serde(with = "kernel::serde_exact::rat")]
    pub y: Rational,
}

impl SquareRecord {
    pub fn config(&self) -> SquareConfig {
        SquareConfig {
            p: self.p.clone(),
            a_sq: &self.a * &self.a,
            b_sq: &self.b * &self.b,
            c_sq: self.c_squared.clone(),
            d_sq: &self.d * &self.d,
        }
    }

    /// Re-derives every field from `(p, a, b, d)` and checks the record.
    pub fn revalidate(&self) -> bool {
        let cfg = self.config();
        let Ok((x, y)) = cfg.point() else {
            return false;
        };
        let residuals = config_residuals(&cfg);
        let c_is_square = as_perfect_square(&self.c_squared).is_some();
        let p = rational_int(self.p.clone());
        let collinear = x.is_zero() || y.is_zero() || x == p || y == p;
        residuals.iter().all(Zero::is_zero)
            && squared_flag_defect(&cfg).is_zero()
            && x == self.x
            && y == self.y
            && self.exact == c_is_square
            && self.collinear == collinear
            && (!self.exact || cfg.is_exact())
    }
}

/// Integer side, three integer distances `a, b, d` and a non-square `c²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearMiss {
    pub p: Integer,
    pub a: Integer,
    pub b: Integer,
    pub d: Integer,
    pub c_squared: Integer,
    pub collinear_flag: bool,
}

impl TryFrom<&SquareRecord> for NearMiss {
    type Error = Error;

    fn try_from(record: &SquareRecord) -> Result<Self> {
        if record.exact {
            return Err(Error::Domain("record is an exact configuration".into()));
        }
        Ok(NearMiss {
            p: record.p.clone(),
            a: record.a.clone(),
            b: record.b.clone(),
            d: record.d.clone(),
            c_squared: record.c_squared.clone(),
            collinear_flag: record.collinear,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareScanResult {
    pub p_max: u64,
    pub ratio: Rational,
    /// `(p, a)` pairs visited.
    pub pairs_enumerated: u64,
    /// Representations `u² + v² = (2pa)²` tested.
    pub representations_checked: u64,
    /// Sorted by `(p, a, b, d)`.
    pub records: Vec<SquareRecord>,
}

impl SquareScanResult {
    pub fn exact_hits(&self) -> impl Iterator<Item = &SquareRecord> {
        self.records.iter().filter(|r| r.exact)
    }

    pub fn near_misses(&self) -> impl Iterator<Item = &SquareRecord> {
        self.records.iter().filter(|r| !r.exact)
    }
}

/// Largest side length the word-sized scan accepts.
pub const SQUARE_SCAN_P_LIMIT: u64 = 1 << 24;

fn factor_into(mut n: u64, factors: &mut BTreeMap<u64, u32>) {
    let mut f = 2;
    while f * f <= n {
        while n.is_multiple_of(f) {
            *factors.entry(f).or_insert(0) += 1;
            n /= f;
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        *factors.entry(n).or_insert(0) += 1;
    }
}

/// Every `(u, v)` with `u² + v² = n²`, signs and order included.
///
/// Each nontrivial representation is `g·(m² − n², 2mn)` up to sign and order,
/// with `g·(m² + n²) = n` and `m² + n²` a product of primes `≡ 1 (mod 4)`;
/// the hypotenuse divisors are enumerated from `factors` (the factorization of
/// `n`) and split into two squares by trial.
fn representations_of_square(n: u64, factors: &BTreeMap<u64, u32>) -> Vec<(i128, i128)> {
    let n_i = n as i128;
    let mut reps = vec![(n_i, 0), (-n_i, 0), (0, n_i), (0, -n_i)];
    let mut hyps = vec![1u64];
    for (&q, &e) in factors {
        if q % 4 != 1 {
            continue;
        }
        let current = hyps.clone();
        let mut power = 1u64;
        for _ in 0..e {
            power *= q;
            hyps.extend(current.iter().map(|h| h * power));
        }
    }
    for h in hyps.into_iter().filter(|&h| h > 1) {
        let g = (n / h) as i128;
        let mut s = 1u64;
        while 2 * s * s < h {
            if let Some(t) = kernel::square_root_u128((h - s * s) as u128) {
                let t = t as u64;
                if (t + s) % 2 == 1 && kernel::gcd_u64(s, t) == 1 {
                    let odd = g * (t * t - s * s) as i128;
                    let even = g * (2 * s * t) as i128;
                    for (l1, l2) in [(odd, even), (even, odd)] {
                        for (su, sv) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                            reps.push((su * l1, sv * l2));
                        }
                    }
                }
            }
            s += 1;
        }
    }
    reps
}

type SquaredTuple = [i128; 4];

/// Lexicographically least image of `(a², b², c², d²)` under the symmetries
/// of the square.
fn orbit_minimum(t: SquaredTuple) -> SquaredTuple {
    let [a, b, c, d] = t;
    [
        [a, b, c, d],
        [b, c, d, a],
        [c, d, a, b],
        [d, a, b, c],
        [a, d, c, b],
        [b, a, d, c],
        [c, b, a, d],
        [d, c, b, a],
    ]
    .into_iter()
    .min()
    .expect("orbit is nonempty")
}

fn scan_side(p: u64, a_max: u64) -> (Vec<SquareRecord>, u64) {
    let mut records = Vec::new();
    let mut checked = 0u64;
    let mut p_factors = BTreeMap::new();
    factor_into(p, &mut p_factors);
    let p_i = p as i128;
    let p_sq = p_i * p_i;
    for a in 1..=a_max {
        let mut factors = p_factors.clone();
        *factors.entry(2).or_insert(0) += 1;
        factor_into(a, &mut factors);
        let a_i = a as i128;
        let a_sq = a_i * a_i;
        let s = p_sq + a_sq;
        for (u, v) in representations_of_square(2 * p * a, &factors) {
            checked += 1;
            let d_sq = s - u;
            let b_sq = s - v;
            let (Some(b), Some(d)) = (square_root_i128(b_sq), square_root_i128(d_sq)) else {
                continue;
            };
            let c_sq = b_sq + d_sq - a_sq;
            let exact = square_root_i128(c_sq).is_some();
            let keep = if exact {
                let t = [a_sq, b_sq, c_sq, d_sq];
                orbit_minimum(t) == t
            } else {
                b <= d
            };
            if !keep {
                continue;
            }
            let two_p_sq = 2 * p_sq;
            let collinear = u == 0 || v == 0 || u == two_p_sq || v == two_p_sq;
            let two_p = Integer::from(2 * p);
            records.push(SquareRecord {
                p: p.into(),
                a: a.into(),
                b: b.into(),
                d: d.into(),
                c_squared: c_sq.into(),
                exact,
                collinear,
                x: Rational::new(u.into(), two_p.clone()),
                y: Rational::new(v.into(), two_p),
            });
        }
    }
    (records, checked)
}

fn record_key(r: &SquareRecord) -> (&Integer, &Integer, &Integer, &Integer) {
    (&r.p, &r.a, &r.b, &r.d)
}

/// Exhaustive search over `1 ≤ p ≤ p_max` and `1 ≤ a ≤ ratio·p`.
///
/// For each `(p, a)` every representation `u² + v² = (2pa)²` fixes
/// `d² = p² + a² − u` and `b² = p² + a² − v`; when both are squares,
/// `c² = b² + d² − a²` decides between an exact hit and a near miss. Exact hits
/// are reported once per symmetry orbit (the lexicographically least squared
/// tuple); near misses are reported with the non-square distance at `C` and
/// `b ≤ d`. Work is split by `p` across the rayon pool.
pub fn scan_squares(p_max: u64, ratio: &Rational) -> Result<SquareScanResult> {
    if p_max == 0 {
        return Err(Error::Domain("p_max must be at least 1".into()));
    }
    if p_max > SQUARE_SCAN_P_LIMIT {
        return Err(Error::Domain(format!(
            "p_max above {SQUARE_SCAN_P_LIMIT} is not supported"
        )));
    }
    if !ratio.is_positive() {
        return Err(Error::Domain("distance ratio must be positive".into()));
    }
    let a_bound = |p: u64| -> Result<u64> {
        (ratio * rational_int(p))
            .floor()
            .to_integer()
            .to_u64()
            .filter(|a| a.checked_mul(2 * p).is_some())
            .ok_or_else(|| Error::Domain("distance ratio too large".into()))
    };
    let bounds: Vec<(u64, u64)> = (1..=p_max)
        .map(|p| Ok((p, a_bound(p)?)))
        .collect::<Result<_>>()?;
    let per_side: Vec<(Vec<SquareRecord>, u64)> = bounds
        .into_par_iter()
        .map(|(p, a_max)| scan_side(p, a_max))
        .collect();
    let pairs_enumerated = (1..=p_max).map(|p| a_bound(p).unwrap_or(0)).sum();
    let mut records = Vec::new();
    let mut representations_checked = 0;
    for (mut found, checked) in per_side {
        records.append(&mut found);
        representations_checked += checked;
    }
    records.sort_by(|l, r| record_key(l).cmp(&record_key(r)));
    Ok(SquareScanResult {
        p_max,
        ratio: ratio.clone(),
        pairs_enumerated,
        representations_checked,
        records,
    })
}

/// Reduced form `(2c² + d² ∓ cd − b²)², 3(cd)²` after substituting
/// `p² = c² + d² ∓ cd` into the equation at vertex C.
fn reduced_sixty(c: i128, d: i128, b: i128, sign: i128) -> (i128, i128) {
    let l = 2 * c * c + d * d + sign * c * d - b * b;
    (l * l, 3 * (c * d) * (c * d))
}

/// The vertex-C equation with `p² = c² + d² ∓ cd` substituted, unreduced.
#[cfg(test)]
fn substituted_sixty(c: i128, d: i128, b: i128, sign: i128) -> i128 {
    let p_sq = c * c + d * d + sign * c * d;
    let first = p_sq + c * c - d * d;
    let second = p_sq + c * c - b * b;
    first * first + second * second - 4 * p_sq * c * c
}

fn small(values: [&Integer; 3]) -> Option<[i128; 3]> {
    // 2⁴⁰ keeps every intermediate below 2¹²⁷.
    let limit = Integer::from(1u64 << 30);
    let mut out = [0i128; 3];
    for (slot, v) in out.iter_mut().zip(values) {
        if v.abs() >= limit {
            return None;
        }
        *slot = v.to_i128()?;
    }
    Some(out)
}

fn sixty_excluded(c: &Integer, d: &Integer, b: &Integer, sign: i64) -> bool {
    if let Some([c, d, b]) = small([c, d, b]) {
        let (lhs, rhs) = reduced_sixty(c, d, b, sign as i128);
        return lhs != rhs;
    }
    let sign = Integer::from(sign);
    let l = Integer::from(2) * c * c + d * d + sign * c * d - b * b;
    let cd = c * d;
    &l * &l != Integer::from(3) * &cd * &cd
}

/// `∠CMD = π/3` forces `p² = c² + d² − cd` and then
/// `(2c² + d² − cd − b²)² = 3(cd)²`. Returns `true` when the input is excluded.
pub fn exclusion_angle_pi3(c: &Integer, d: &Integer, b: &Integer) -> bool {
    sixty_excluded(c, d, b, -1)
}

/// `∠CMD = 2π/3` forces `p² = c² + d² + cd` and then
/// `(2c² + d² + cd − b²)² = 3(cd)²`. Returns `true` when the input is excluded.
pub fn exclusion_angle_2pi3(c: &Integer, d: &Integer, b: &Integer) -> bool {
    sixty_excluded(c, d, b, 1)
}

/// A vertex angle such as `∠MDA` equal to `π/3` or `2π/3` gives
/// `a² = p² ∓ pd + d²`, and the equation at vertex D collapses to
/// `(p² + d² − c²)² = 3(pd)²`. Returns `true` when the input is excluded.
pub fn vertex_line_exclusion(
    p: &Integer,
    d: &Integer,
    c: &Integer,
    angle: AngleTag,
) -> Result<bool> {
    let sign = match angle {
        AngleTag::PiOver3 => -1,
        AngleTag::TwoPiOver3 => 1,
        other => {
            return Err(Error::Domain(format!(
                "vertex-line exclusion covers PiOver3 and TwoPiOver3, not {other}"
            )))
        }
    };
    let a_sq = p * p + Integer::from(sign) * p * d + d * d;
    let pd = p * d;
    let first = p * p + d * d - &a_sq;
    let second = p * p + d * d - c * c;
    let residual = &first * &first + &second * &second - Integer::from(4) * &pd * &pd;
    debug_assert_eq!(residual, &second * &second - Integer::from(3) * &pd * &pd);
    Ok(!residual.is_zero())
}

/// Inputs from a sweep that an exclusion predicate failed to reject.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionSweep {
    pub predicate: String,
    pub max: u64,
    pub checked: u64,
    pub defeats: Vec<[u64; 3]>,
}

impl ExclusionSweep {
    pub fn all_excluded(&self) -> bool {
        self.defeats.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SixtyDegreePredicate {
    AnglePi3,
    Angle2Pi3,
    VertexLine,
}

impl SixtyDegreePredicate {
    pub const ALL: [SixtyDegreePredicate; 3] = [
        SixtyDegreePredicate::AnglePi3,
        SixtyDegreePredicate::Angle2Pi3,
        SixtyDegreePredicate::VertexLine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SixtyDegreePredicate::AnglePi3 => "exclusion_angle_pi3",
            SixtyDegreePredicate::Angle2Pi3 => "exclusion_angle_2pi3",
            SixtyDegreePredicate::VertexLine => "vertex_line_exclusion",
        }
    }

    /// Word-sized evaluation; `true` means excluded.
    fn excluded_small(self, x: i128, y: i128, z: i128) -> bool {
        match self {
            SixtyDegreePredicate::AnglePi3 => {
                let (l, r) = reduced_sixty(x, y, z, -1);
                l != r
            }
            SixtyDegreePredicate::Angle2Pi3 => {
                let (l, r) = reduced_sixty(x, y, z, 1);
                l != r
            }
            SixtyDegreePredicate::VertexLine => {
                let l = x * x + y * y - z * z;
                l * l != 3 * (x * y) * (x * y)
            }
        }
    }

    pub fn excluded(self, x: &Integer, y: &Integer, z: &Integer) -> bool {
        match self {
            SixtyDegreePredicate::AnglePi3 => exclusion_angle_pi3(x, y, z),
            SixtyDegreePredicate::Angle2Pi3 => exclusion_angle_2pi3(x, y, z),
            SixtyDegreePredicate::VertexLine => {
                vertex_line_exclusion(x, y, z, AngleTag::PiOver3).expect("PiOver3 is accepted")
            }
        }
    }
}

/// Evaluates a predicate on every triple in `[1, max]³`.
pub fn sweep_exclusion(predicate: SixtyDegreePredicate, max: u64) -> ExclusionSweep {
    let mut defeats: Vec<[u64; 3]> = (1..=max)
        .into_par_iter()
        .flat_map_iter(|x| {
            let mut found = Vec::new();
            for y in 1..=max {
                for z in 1..=max {
                    if !predicate.excluded_small(x as i128, y as i128, z as i128) {
                        found.push([x, y, z]);
                    }
                }
            }
            found
        })
        .collect();
    defeats.sort();
    ExclusionSweep {
        predicate: predicate.name().to_owned(),
        max,
        checked: max * max * max,
        defeats,
    }
}

/// Full configurations with `∠CMD = π/2` for `p ≤ p_max`.
///
/// A right angle at `M` gives `c² + d² = p²`; the equation at `C` then reduces
/// to `b² = c² + (c ± d)²`, and the British-flag identity fixes
/// `a² = b² + d² − c²`. Each surviving candidate is checked against all four
/// circle equations. Solutions are reported with `a = c`, `b = d` and
/// `roots = [p, b, a]`.
pub fn exclusion_angle_pi2(p_max: u64) -> FormScanCertificate {
    let start = std::time::Instant::now();
    let per_side: Vec<(Vec<FormSolution>, u64)> = (1..=p_max)
        .into_par_iter()
        .map(|p| {
            let p_i = p as i128;
            let mut found = Vec::new();
            let mut visited = 0;
            for c in 1..p_i {
                let Some(d) = square_root_i128(p_i * p_i - c * c) else {
                    continue;
                };
                visited += 1;
                for b_sq in [c * c + (c + d) * (c + d), c * c + (c - d) * (c - d)] {
                    let Some(b) = square_root_i128(b_sq) else {
                        continue;
                    };
                    let a_sq = b_sq + d * d - c * c;
                    let Some(a) = square_root_i128(a_sq) else {
                        continue;
                    };
                    let cfg = SquareConfig::from_distances(
                        &p_i.into(),
                        &a.into(),
                        &b.into(),
                        &c.into(),
                        &d.into(),
                    );
                    if config_residuals(&cfg).iter().all(Zero::is_zero) && cfg.is_exact() {
                        found.push(FormSolution {
                            a: c.into(),
                            b: d.into(),
                            roots: vec![p_i.into(), b.into(), a.into()],
                        });
                    }
                }
            }
            (found, visited)
        })
        .collect();
    let mut solutions_found = Vec::new();
    let mut enumerated_count = 0;
    for (mut found, visited) in per_side {
        solutions_found.append(&mut found);
        enumerated_count += visited;
    }
    solutions_found.sort();
    FormScanCertificate {
        equation: FormEquation::RightAngleSquare,
        bound: p_max,
        solutions_found,
        elapsed: start.elapsed(),
        enumerated_count,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SquareAngle {
    Amb,
    Bmc,
    Cmd,
    Amd,
    Mab,
    Mba,
    Mbc,
    Mcb,
    Mcd,
    Mdc,
    Mda,
    Mad,
}

impl SquareAngle {
    pub const ALL: [SquareAngle; 12] = [
        SquareAngle::Amb,
        SquareAngle::Bmc,
        SquareAngle::Cmd,
        SquareAngle::Amd,
        SquareAngle::Mab,
        SquareAngle::Mba,
        SquareAngle::Mbc,
        SquareAngle::Mcb,
        SquareAngle::Mcd,
        SquareAngle::Mdc,
        SquareAngle::Mda,
        SquareAngle::Mad,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SquareAngle::Amb => "AMB",
            SquareAngle::Bmc => "BMC",
            SquareAngle::Cmd => "CMD",
            SquareAngle::Amd => "AMD",
            SquareAngle::Mab => "MAB",
            SquareAngle::Mba => "MBA",
            SquareAngle::Mbc => "MBC",
            SquareAngle::Mcb => "MCB",
            SquareAngle::Mcd => "MCD",
            SquareAngle::Mdc => "MDC",
            SquareAngle::Mda => "MDA",
            SquareAngle::Mad => "MAD",
        }
    }

    /// At the point `M`, between two distances.
    pub fn is_at_point(self) -> bool {
        matches!(
            self,
            SquareAngle::Amb | SquareAngle::Bmc | SquareAngle::Cmd | SquareAngle::Amd
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleEntry {
    pub angle: SquareAngle,
    pub cosine: Cosine,
    /// `None` when the cosine is irrational.
    pub class: Option<AngleClass>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleReport {
    pub entries: Vec<AngleEntry>,
}

impl AngleReport {
    pub fn get(&self, angle: SquareAngle) -> &AngleEntry {
        self.entries
            .iter()
            .find(|e| e.angle == angle)
            .expect("report covers all twelve angles")
    }

    /// Every angle has a rational cosine and none is commensurable with π.
    pub fn all_not_commensurable(&self) -> bool {
        self.entries.iter().all(|e| {
            e.class
                .as_ref()
                .is_some_and(|c| c.tag == AngleTag::NotCommensurable)
        })
    }

    pub fn commensurable(&self) -> impl Iterator<Item = &AngleEntry> {
        self.entries
            .iter()
            .filter(|e| e.class.as_ref().is_some_and(|c| c.tag.is_commensurable()))
    }
}

/// Classifies the four angles at `M` and the eight angles between `M` and a
/// side at each vertex.
pub fn angle_scan(cfg: &SquareConfig) -> Result<AngleReport> {
    if !squared_flag_defect(cfg).is_zero() {
        return Err(Error::Domain(
            "distances violate the British-flag identity".into(),
        ));
    }
    for (name, v) in [
        ("a", &cfg.a_sq),
        ("b", &cfg.b_sq),
        ("c", &cfg.c_sq),
        ("d", &cfg.d_sq),
    ] {
        if !v.is_positive() {
            return Err(Error::Domain(format!("distance {name} must be positive")));
        }
    }
    let side = &cfg.p * &cfg.p;
    let (a, b, c, d) = (&cfg.a_sq, &cfg.b_sq, &cfg.c_sq, &cfg.d_sq);
    let entries = SquareAngle::ALL
        .into_iter()
        .map(|angle| {
            use SquareAngle::*;
            // (adjacent, adjacent, opposite), all squared
            let (u, v, w) = match angle {
                Amb => (a, b, &side),
                Bmc => (b, c, &side),
                Cmd => (c, d, &side),
                Amd => (a, d, &side),
                Mab => (a, &side, b),
                Mba => (b, &side, a),
                Mbc => (b, &side, c),
                Mcb => (c, &side, b),
                Mcd => (c, &side, d),
                Mdc => (d, &side, c),
                Mda => (d, &side, a),
                Mad => (a, &side, d),
            };
            let cosine = angle::cos_from_squared_sides(u, v, w)
                .map_err(|e| Error::Domain(format!("angle {}: {e}", angle.label())))?;
            let class = cosine.as_rational().map(angle::classify_cos).transpose()?;
            Ok(AngleEntry {
                angle,
                cosine,
                class,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AngleReport { entries })
}

impl PartialOrd for SquareRecord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SquareRecord {
    fn cmp(&self, other: &Self) -> Ordering {
        record_key(self)
            .cmp(&record_key(other))
            .then_with(|| self.c_squared.cmp(&other.c_squared))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rational;
    use proptest::prelude::*;

    fn int(v: i64) -> Integer {
        Integer::from(v)
    }

    /// Quadruple-loop oracle over `(p, a, b, d)` with the same reporting rule.
    fn naive_scan(p_max: i64) -> Vec<(i64, i64, i64, i64, i64, bool, bool)> {
        let is_sq = |n: i64| n >= 0 && ((n as f64).sqrt().round() as i64).pow(2) == n;
        let mut out = Vec::new();
        for p in 1..=p_max {
            for a in 1..=3 * p {
                for b in (a - p).abs()..=a + p {
                    for d in (a - p).abs()..=a + p {
                        let (u, v) = (p * p + a * a - d * d, p * p + a * a - b * b);
                        if u * u + v * v != 4 * p * p * a * a {
                            continue;
                        }
                        let c_sq = b * b + d * d - a * a;
                        let exact = is_sq(c_sq);
                        let keep = if exact {
                            let t = [a * a, b * b, c_sq, d * d].map(|x| x as i128);
                            orbit_minimum(t) == t
                        } else {
                            b <= d
                        };
                        if keep {
                            let collinear = u == 0 || v == 0 || u == 2 * p * p || v == 2 * p * p;
                            out.push((p, a, b, d, c_sq, exact, collinear));
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    fn as_tuples(result: &SquareScanResult) -> Vec<(i64, i64, i64, i64, i64, bool, bool)> {
        result
            .records
            .iter()
            .map(|r| {
                (
                    r.p.to_i64().unwrap(),
                    r.a.to_i64().unwrap(),
                    r.b.to_i64().unwrap(),
                    r.d.to_i64().unwrap(),
                    r.c_squared.to_i64().unwrap(),
                    r.exact,
                    r.collinear,
                )
            })
            .collect()
    }

    #[test]
    fn point_examples() {
        assert_eq!(
            point_from_distances(&int(4), &int(5), &int(5), &int(5)).unwrap(),
            (rational_int(2), rational_int(2))
        );
        assert_eq!(
            point_from_distances(&int(3), &int(4), &int(1), &int(5)).unwrap(),
            (rational_int(0), rational_int(4))
        );
        assert_eq!(
            point_from_distances(&int(1), &int(1), &int(1), &int(1)).unwrap(),
            (rational(1, 2), rational(1, 2))
        );
        assert!(point_from_distances(&int(0), &int(1), &int(1), &int(1)).is_err());
    }

    #[test]
    fn residual_examples() {
        let near = SquareConfig::from_squared(&int(3), &int(16), &int(1), &int(10), &int(25));
        assert_eq!(config_residuals(&near), [int(0), int(0), int(0), int(0)]);
        assert!(!near.is_exact());
        let unit = SquareConfig::from_distances(&int(1), &int(1), &int(1), &int(1), &int(1));
        assert_eq!(config_residuals(&unit)[0], int(-2));
        let zero = SquareConfig::from_distances(&int(2), &int(0), &int(0), &int(0), &int(0));
        assert!(config_residuals(&zero).iter().all(|r| r == &int(32)));
    }

    #[test]
    fn british_flag_examples() {
        let cfg = SquareConfig::from_squared(&int(4), &int(5), &int(5), &int(13), &int(13));
        assert!(squared_flag_defect(&cfg).is_zero());
        assert_eq!(
            british_flag_defect(&int(1), &int(1), &int(1), &int(1)),
            int(0)
        );
        assert_eq!(
            british_flag_defect(&int(2), &int(1), &int(1), &int(1)),
            int(3)
        );
    }

    #[test]
    fn scan_examples() {
        let two = scan_squares(2, &rational_int(3)).unwrap();
        assert_eq!(two.exact_hits().count(), 0);
        let three = scan_squares(3, &rational_int(3)).unwrap();
        assert_eq!(
            as_tuples(&three),
            vec![(3, 4, 1, 5, 10, false, true), (3, 4, 5, 7, 58, false, true)]
        );
        let first = &three.records[0];
        assert_eq!(
            (first.x.clone(), first.y.clone()),
            (rational_int(0), rational_int(4))
        );
        assert!(three.records.iter().all(SquareRecord::revalidate));
    }

    #[test]
    fn scan_matches_naive_oracle_to_18() {
        let result = scan_squares(18, &rational_int(3)).unwrap();
        assert_eq!(as_tuples(&result), naive_scan(18));
    }

    #[test]
    fn scan_rejects_bad_bounds() {
        assert!(scan_squares(0, &rational_int(3)).is_err());
        assert!(scan_squares(5, &rational_int(0)).is_err());
        assert!(scan_squares(5, &rational(-1, 2)).is_err());
    }

    #[test]
    fn fractional_ratio_limits_the_box() {
        let result = scan_squares(3, &rational(4, 3)).unwrap();
        assert_eq!(
            as_tuples(&result),
            vec![(3, 4, 1, 5, 10, false, true), (3, 4, 5, 7, 58, false, true)]
        );
        assert!(scan_squares(3, &rational(1, 1)).unwrap().records.is_empty());
    }

    #[test]
    fn representations_are_complete() {
        for n in 1..200u64 {
            let mut factors = BTreeMap::new();
            factor_into(n, &mut factors);
            let mut reps = representations_of_square(n, &factors);
            reps.sort();
            let n = n as i128;
            let mut brute = Vec::new();
            for u in -n..=n {
                if let Some(v) = square_root_i128(n * n - u * u) {
                    brute.push((u, v));
                    if v != 0 {
                        brute.push((u, -v));
                    }
                }
            }
            brute.sort();
            assert_eq!(reps, brute, "n = {n}");
        }
    }

    #[test]
    fn sixty_degree_examples() {
        assert!(exclusion_angle_pi3(&int(2), &int(3), &int(1)));
        assert_eq!(reduced_sixty(2, 3, 1, -1), (100, 108));
        assert_eq!(reduced_sixty(2, 3, 1, 1), (484, 108));
        assert!(exclusion_angle_pi3(&int(1), &int(1), &int(1)));
        assert_eq!(reduced_sixty(1, 1, 1, -1), (1, 3));
        assert!(exclusion_angle_2pi3(&int(2), &int(3), &int(1)));
        assert!(exclusion_angle_2pi3(&int(1), &int(1), &int(2)));
        assert_eq!(reduced_sixty(1, 1, 2, 1), (0, 3));
        assert!(vertex_line_exclusion(&int(1), &int(1), &int(1), AngleTag::PiOver3).unwrap());
        assert!(vertex_line_exclusion(&int(2), &int(2), &int(2), AngleTag::TwoPiOver3).unwrap());
        assert!(vertex_line_exclusion(&int(2), &int(2), &int(2), AngleTag::PiOver2).is_err());
        let huge = Integer::from(1u64 << 40);
        assert!(exclusion_angle_pi3(&huge, &huge, &huge));
    }

    #[test]
    fn right_angle_examples() {
        assert!(exclusion_angle_pi2(5).certifies_absence());
        // the reduced equation on its own has solutions
        assert_eq!((20 + 1) * (20 + 1) + 20 * 20, 29 * 29);
        assert!(exclusion_angle_pi2(60).certifies_absence());
    }

    #[test]
    fn angle_scan_examples() {
        let near = SquareConfig::from_squared(&int(3), &int(16), &int(1), &int(10), &int(25));
        let report = angle_scan(&near).unwrap();
        let mab = report.get(SquareAngle::Mab);
        assert_eq!(mab.cosine, Cosine::Rational(rational_int(1)));
        assert_eq!(mab.class.as_ref().unwrap().tag, AngleTag::Zero);

        let grid = SquareConfig::from_squared(&int(4), &int(5), &int(5), &int(13), &int(13));
        let report = angle_scan(&grid).unwrap();
        let amb = report.get(SquareAngle::Amb);
        assert_eq!(amb.cosine, Cosine::Rational(rational(-3, 5)));
        assert_eq!(amb.class.as_ref().unwrap().tag, AngleTag::NotCommensurable);
        assert_eq!(report.entries.len(), 12);

        let degenerate = SquareConfig::from_squared(&int(1), &int(0), &int(1), &int(2), &int(1));
        assert!(angle_scan(&degenerate).is_err());
        let broken = SquareConfig::from_squared(&int(1), &int(4), &int(1), &int(1), &int(1));
        assert!(angle_scan(&broken).is_err());
    }

    proptest! {
        #[test]
        fn elimination_ties_all_residuals_together(p in 1i64..200, a in 0i64..600, b in 0i64..600, d in 0i64..600) {
            let (x, y) = point_from_distances(&int(p), &int(a), &int(b), &int(d)).unwrap();
            let p = rational_int(p);
            let at_a = &x * &x + &y * &y - rational_int(a * a);
            let at_b = &x * &x + (&p - &y) * (&p - &y) - rational_int(b * b);
            let at_d = (&x - &p) * (&x - &p) + &y * &y - rational_int(d * d);
            prop_assert_eq!(&at_b, &at_a);
            prop_assert_eq!(&at_d, &at_a);
        }

        #[test]
        fn rational_points_satisfy_british_flag(p in 1i64..100, xn in -500i64..500, yn in -500i64..500, den in 1i64..20) {
            let (x, y) = (rational(xn, den), rational(yn, den));
            let p = rational_int(p);
            let dist = |vx: &Rational, vy: &Rational| (&x - vx) * (&x - vx) + (&y - vy) * (&y - vy);
            let zero = rational_int(0);
            let a = dist(&zero, &zero);
            let b = dist(&zero, &p);
            let c = dist(&p, &p);
            let d = dist(&p, &zero);
            prop_assert_eq!(a + c, b + d);
        }

        #[test]
        fn substitution_reduces_exactly(c in -300i128..300, d in -300i128..300, b in -300i128..300) {
            for sign in [-1, 1] {
                let (l, r) = reduced_sixty(c, d, b, sign);
                prop_assert_eq!(substituted_sixty(c, d, b, sign), l - r);
            }
        }

        #[test]
        fn random_triples_are_excluded(c in 1i64..100_000, d in 1i64..100_000, b in 1i64..100_000) {
            let (c, d, b) = (int(c), int(d), int(b));
            prop_assert!(exclusion_angle_pi3(&c, &d, &b));
            prop_assert!(exclusion_angle_2pi3(&c, &d, &b));
            prop_assert!(vertex_line_exclusion(&c, &d, &b, AngleTag::PiOver3).unwrap());
            prop_assert!(vertex_line_exclusion(&c, &d, &b, AngleTag::TwoPiOver3).unwrap());
        }
    }
}
