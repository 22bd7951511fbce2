//! Equilateral triangles with a plane point at integer distances from the
//! vertices.
//!
//! Frame: `A = (0, 0)`, `B = (a, 0)`, `C = (a/2, a√3/2)`. The point `M` is at
//! distance `p` from `A`, `k` from `B` and `q` from `C`. Points are written
//! `(x, t·√3)` with `x` and `t` rational, so every computation stays exact.

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::{self, AngleClass, AngleTag};
use crate::error::{Error, Result};
use crate::kernel::{self, as_perfect_square, rational_int, square_root_i128, Integer, Rational};

/// Side `a` with distances `p = MA`, `q = MC` and `k = MB`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriangleConfig {
    #[serde(with = "kernel::serde_exact::int")]
    pub a: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub p: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub q: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub k: Integer,
}

impl TriangleConfig {
    pub fn new(
        a: impl Into<Integer>,
        p: impl Into<Integer>,
        q: impl Into<Integer>,
        k: impl Into<Integer>,
    ) -> Self {
        Self {
            a: a.into(),
            p: p.into(),
            q: q.into(),
            k: k.into(),
        }
    }

    pub fn residual(&self) -> Integer {
        quartic_residual(&self.a, &self.p, &self.q, &self.k)
    }

    pub fn point(&self) -> Result<TrianglePoint> {
        point_from_distances_tri(&self.a, &self.p, &self.k, &self.q)
    }

    /// Residual zero and a real point with these distances exists.
    pub fn is_exact(&self) -> bool {
        self.residual().is_zero() && self.point().is_ok_and(|pt| pt.defect.is_zero())
    }

    /// Distances in ascending order.
    pub fn sorted_distances(&self) -> [Integer; 3] {
        let mut d = [self.p.clone(), self.q.clone(), self.k.clone()];
        d.sort();
        d
    }
}

/// `a⁴ + p⁴ + q⁴ + k⁴` minus the six pairwise products of squares.
pub fn quartic_residual(a: &Integer, p: &Integer, q: &Integer, k: &Integer) -> Integer {
    let sq = [a * a, p * p, q * q, k * k];
    let mut total: Integer = sq.iter().map(|s| s * s).sum();
    for i in 0..4 {
        for j in i + 1..4 {
            total -= &sq[i] * &sq[j];
        }
    }
    total
}

/// The same quartic written as a polynomial in `a²`, minus [`quartic_residual`].
pub fn quartic_rearrangement_defect(a: &Integer, p: &Integer, q: &Integer, k: &Integer) -> Integer {
    let (a2, p2, q2, k2) = (a * a, p * p, q * q, k * k);
    let arranged = &a2 * &a2 - (&p2 + &q2 + &k2) * &a2 + &p2 * &p2 + &q2 * &q2 + &k2 * &k2
        - &p2 * &q2
        - &p2 * &k2
        - &q2 * &k2;
    arranged - quartic_residual(a, p, q, k)
}

/// `(a² − (p² + pq + q²))(a² + pq − k²) − ((p + q)² − k²)(k² − (p² − pq + q²))`.
///
/// Equal to [`quartic_residual`] for all integers, so the product form holds
/// exactly on the zero set of the residual.
pub fn factorization_defect_by_side(a: &Integer, p: &Integer, q: &Integer, k: &Integer) -> Integer {
    let (a2, p2, q2, k2, pq) = (a * a, p * p, q * q, k * k, p * q);
    let s = p + q;
    (&a2 - (&p2 + &pq + &q2)) * (&a2 + &pq - &k2) - (&s * &s - &k2) * (&k2 - (&p2 - &pq + &q2))
}

/// [`factorization_defect_by_side`] with the roles of `a` and `k` exchanged.
pub fn factorization_defect_by_distance(
    a: &Integer,
    p: &Integer,
    q: &Integer,
    k: &Integer,
) -> Integer {
    factorization_defect_by_side(k, p, q, a)
}

/// The point `(x, t·√3)` determined by the distances to `A` and `B` and the
/// apex, plus `defect = p² − x² − 3t²`.
///
/// A zero defect means the remaining circle around `A` passes through the
/// point, i.e. a real point with all three distances exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrianglePoint {
    #[serde(with = "kernel::serde_exact::rat")]
    pub x: Rational,
    #[serde(with = "kernel::serde_exact::rat")]
    pub t: Rational,
    #[serde(with = "kernel::serde_exact::rat")]
    pub defect: Rational,
}

pub fn point_from_distances_tri(
    a: &Integer,
    p: &Integer,
    k: &Integer,
    q: &Integer,
) -> Result<TrianglePoint> {
    if !a.is_positive() {
        return Err(Error::Domain(format!(
            "side length must be positive, got {a}"
        )));
    }
    let (a2, p2, k2, q2) = (a * a, p * p, k * k, q * q);
    let two_a = Integer::from(2) * a;
    let x = Rational::new(&a2 + &p2 - &k2, two_a);
    let t = (rational_int(&p2 + &a2 - &q2) - rational_int(a.clone()) * &x)
        / rational_int(Integer::from(3) * a);
    let defect = rational_int(p2) - &x * &x - rational_int(3) * &t * &t;
    Ok(TrianglePoint { x, t, defect })
}

/// Which leg of the `120°` Eisenstein triple is the side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum FamilyForm {
    /// `a = l(m² − n²)`, `p = l(n² + 2mn)`.
    #[default]
    SideFirst,
    /// `a = l(n² + 2mn)`, `p = l(m² − n²)`.
    DistanceFirst,
    /// `a = l(m² − n²)`, `p = l(m² + 2mn)`. Kept to show that it fails
    /// validation.
    AsPrinted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyParams {
    pub l: Integer,
    pub m: Integer,
    pub n: Integer,
    pub form: FamilyForm,
}

impl FamilyParams {
    pub fn new(l: impl Into<Integer>, m: impl Into<Integer>, n: impl Into<Integer>) -> Self {
        Self {
            l: l.into(),
            m: m.into(),
            n: n.into(),
            form: FamilyForm::SideFirst,
        }
    }

    pub fn with_form(mut self, form: FamilyForm) -> Self {
        self.form = form;
        self
    }
}

/// Points on the line through `A` and `C`, beyond `A`: `q = a + p` and
/// `k² = a² + ap + p²`.
pub fn gen_circumcircle_family(params: &FamilyParams) -> Result<TriangleConfig> {
    let FamilyParams { l, m, n, form } = params;
    if !(n >= &Integer::from(1) && m > n && l >= &Integer::from(1)) {
        return Err(Error::Domain(format!(
            "family parameters need m > n >= 1 and l >= 1, got l={l}, m={m}, n={n}"
        )));
    }
    let (m2, n2, mn) = (m * m, n * n, m * n);
    let difference = l * (&m2 - &n2);
    let eisenstein = l * (&n2 + Integer::from(2) * &mn);
    let (a, p) = match form {
        FamilyForm::SideFirst => (difference, eisenstein),
        FamilyForm::DistanceFirst => (eisenstein, difference),
        FamilyForm::AsPrinted => (difference, l * (&m2 + Integer::from(2) * &mn)),
    };
    let k = l * (&m2 + &mn + &n2);
    let q = &a + &p;
    let cfg = TriangleConfig { a, p, q, k };
    let (a, p, k) = (&cfg.a, &cfg.p, &cfg.k);
    if k * k != a * a + a * p + p * p {
        return Err(Error::Consistency(format!(
            "family ({l}, {m}, {n}, {form:?}) gives k² = {} but a² + ap + p² = {}",
            k * k,
            a * a + a * p + p * p
        )));
    }
    if !cfg.residual().is_zero() {
        return Err(Error::Consistency(format!(
            "family ({l}, {m}, {n}, {form:?}) has nonzero residual {}",
            cfg.residual()
        )));
    }
    Ok(cfg)
}

/// One hit of [`scan_triangles`], in canonical order `p ≤ q ≤ k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleRecord {
    #[serde(with = "kernel::serde_exact::int")]
    pub a: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub p: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub q: Integer,
    #[serde(with = "kernel::serde_exact::int")]
    pub k: Integer,
    /// On one of the three side lines.
    pub collinear: bool,
    /// Strictly inside the triangle.
    pub inside: bool,
    #[serde(with = "kernel::serde_exact::rat")]
    pub defect: Rational,
}

impl TriangleRecord {
    pub fn config(&self) -> TriangleConfig {
        TriangleConfig::new(
            self.a.clone(),
            self.p.clone(),
            self.q.clone(),
            self.k.clone(),
        )
    }

    /// Recomputes residual, point, defect and flags from the four integers.
    pub fn revalidate(&self) -> bool {
        let cfg = self.config();
        let Ok(pt) = cfg.point() else {
            return false;
        };
        let (zero, a) = (rational_int(0), rational_int(self.a.clone()));
        let on_line = pt.t == zero || pt.t == pt.x || pt.t == &a - &pt.x;
        let inside = pt.t > zero && pt.t < pt.x && pt.t < &a - &pt.x;
        cfg.residual().is_zero()
            && self.p <= self.q
            && self.q <= self.k
            && pt.defect == self.defect
            && on_line == self.collinear
            && inside == self.inside
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleScanResult {
    pub a_max: u64,
    pub ratio: Rational,
    /// `(a, p, q)` triples visited.
    pub enumerated: u64,
    /// Sorted by `(a, p, q, k)`.
    pub records: Vec<TriangleRecord>,
}

/// Largest side the word-sized scan accepts.
pub const TRIANGLE_SCAN_A_LIMIT: u64 = 1 << 20;

fn scan_side(a: u64, d_max: u64) -> (Vec<TriangleRecord>, u64) {
    let a_i = a as i128;
    let a2 = a_i * a_i;
    let mut records = Vec::new();
    let mut visited = 0;
    for p in 1..=d_max as i128 {
        let p2 = p * p;
        let q_low = p.max((a_i - p).abs());
        let q_high = (d_max as i128).min(a_i + p);
        for q in q_low..=q_high {
            visited += 1;
            let q2 = q * q;
            // residual = K² − S·K + T with K = k²
            let s = a2 + p2 + q2;
            let t = a2 * a2 + p2 * p2 + q2 * q2 - a2 * p2 - a2 * q2 - p2 * q2;
            let Some(root) = square_root_i128(s * s - 4 * t) else {
                continue;
            };
            let candidates = if root == 0 {
                vec![s]
            } else {
                vec![s - root, s + root]
            };
            for twice in candidates {
                if twice % 2 != 0 {
                    continue;
                }
                let Some(k) = square_root_i128(twice / 2) else {
                    continue;
                };
                if k < q || k > d_max as i128 {
                    continue;
                }
                records.push(describe(a_i, p, q, k));
            }
        }
    }
    (records, visited)
}

fn describe(a: i128, p: i128, q: i128, k: i128) -> TriangleRecord {
    let (a2, p2, q2, k2) = (a * a, p * p, q * q, k * k);
    // x = big_x / 2a, t = big_t / 6a
    let big_x = a2 + p2 - k2;
    let big_t = 2 * (p2 + a2 - q2) - big_x;
    let on_line = big_t == 0 || big_t == 3 * big_x || big_t == 3 * (2 * a2 - big_x);
    let inside = big_t > 0 && big_t < 3 * big_x && big_t < 3 * (2 * a2 - big_x);
    let defect = Rational::new(
        Integer::from(12 * a2) * Integer::from(p2)
            - Integer::from(3 * big_x) * Integer::from(big_x)
            - Integer::from(big_t) * Integer::from(big_t),
        Integer::from(12 * a2),
    );
    TriangleRecord {
        a: a.into(),
        p: p.into(),
        q: q.into(),
        k: k.into(),
        collinear: on_line,
        inside,
        defect,
    }
}

/// Exhaustive search over `a ≤ a_max` and `p ≤ q ≤ k ≤ ratio·a`.
///
/// For fixed `(a, p, q)` the residual is a quadratic in `k²`, so `k` is solved
/// for rather than enumerated. Sides are split across the rayon pool.
pub fn scan_triangles(a_max: u64, ratio: &Rational) -> Result<TriangleScanResult> {
    if a_max == 0 {
        return Err(Error::Domain("a_max must be at least 1".into()));
    }
    if a_max > TRIANGLE_SCAN_A_LIMIT {
        return Err(Error::Domain(format!(
            "a_max above {TRIANGLE_SCAN_A_LIMIT} is not supported"
        )));
    }
    if !ratio.is_positive() {
        return Err(Error::Domain("distance ratio must be positive".into()));
    }
    let bounds: Vec<(u64, u64)> = (1..=a_max)
        .map(|a| {
            (ratio * rational_int(a))
                .floor()
                .to_integer()
                .to_u64()
                .filter(|&d| d <= 4 * TRIANGLE_SCAN_A_LIMIT)
                .map(|d| (a, d))
                .ok_or_else(|| Error::Domain("distance ratio too large".into()))
        })
        .collect::<Result<_>>()?;
    let per_side: Vec<(Vec<TriangleRecord>, u64)> = bounds
        .into_par_iter()
        .map(|(a, d_max)| scan_side(a, d_max))
        .collect();
    let mut records = Vec::new();
    let mut enumerated = 0;
    for (mut found, visited) in per_side {
        records.append(&mut found);
        enumerated += visited;
    }
    records.sort_by(|l, r| (&l.a, &l.p, &l.q, &l.k).cmp(&(&r.a, &r.p, &r.q, &r.k)));
    Ok(TriangleScanResult {
        a_max,
        ratio: ratio.clone(),
        enumerated,
        records,
    })
}

/// Classes of the six angles between `M` and the sides at the three vertices,
/// in the order `MAB, MAC, MBA, MBC, MCA, MCB`.
pub fn vertex_angles(cfg: &TriangleConfig) -> Result<[AngleClass; 6]> {
    let TriangleConfig { a, p, q, k } = cfg;
    let pairs = [(p, k), (p, q), (k, p), (k, q), (q, p), (q, k)];
    let mut out = Vec::with_capacity(6);
    for (near, far) in pairs {
        // angle at the vertex between the side and the segment to M
        let cos = angle::cos_from_sides(near, a, far)?;
        out.push(angle::classify_cos(&cos)?);
    }
    Ok(out.try_into().expect("six angles"))
}

/// Verdict for one prescribed angle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub label: String,
    pub angle: AngleTag,
    pub constraint: String,
    pub solvable: bool,
    pub witness: Option<TriangleConfig>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub cases: Vec<CaseVerdict>,
}

impl CaseReport {
    pub fn case(&self, label: &str) -> Option<&CaseVerdict> {
        self.cases.iter().find(|c| c.label == label)
    }
}

fn positive(values: &[&Integer]) -> bool {
    values.iter().all(|v| v.is_positive())
}

/// Checks a claimed witness before it is reported.
fn confirmed(cfg: TriangleConfig) -> Result<Option<TriangleConfig>> {
    if !positive(&[&cfg.a, &cfg.p, &cfg.q, &cfg.k]) {
        return Ok(None);
    }
    if !cfg.is_exact() {
        return Err(Error::Consistency(format!(
            "case witness {cfg:?} is not a real point"
        )));
    }
    Ok(Some(cfg))
}

fn verdict(
    label: &str,
    angle: AngleTag,
    constraint: String,
    witness: Option<TriangleConfig>,
    reason: &str,
) -> CaseVerdict {
    CaseVerdict {
        label: label.to_owned(),
        angle,
        constraint,
        solvable: witness.is_some(),
        witness,
        reason: reason.to_owned(),
    }
}

/// The five possibilities for a commensurable angle `MAC` with rational cosine,
/// given the side `a` and `p = MA`.
///
/// Angle `π` puts `M` on line `AC` beyond `A`; `2π/3` with `M` off the side
/// lines needs both quadratic forms square; `π/3` puts `M` on ray `AB`; a
/// right angle needs `√3` rational; angle `0` puts `M` on ray `AC`.
pub fn vertex_angle_cases(a: &Integer, p: &Integer) -> Result<CaseReport> {
    if !positive(&[a, p]) {
        return Err(Error::Domain("side and distance must be positive".into()));
    }
    let plus = a * a + a * p + p * p;
    let minus = a * a - a * p + p * p;
    let gap = (a - p).abs();
    let mut cases = Vec::new();

    let witness = match as_perfect_square(&plus) {
        Some(k) => confirmed(TriangleConfig::new(a.clone(), p.clone(), a + p, k))?,
        None => None,
    };
    cases.push(verdict(
        "beyond_a_on_line_ac",
        AngleTag::Pi,
        format!("q = a + p, k² = a² + ap + p² = {plus}"),
        witness,
        "Eisenstein triple with legs a and p",
    ));

    let witness = match (as_perfect_square(&minus), as_perfect_square(&plus)) {
        (Some(k), Some(q)) => confirmed(TriangleConfig::new(a.clone(), p.clone(), q, k))?,
        _ => None,
    };
    cases.push(verdict(
        "off_side_lines",
        AngleTag::TwoPiOver3,
        format!("k² = a² − ap + p² = {minus}, q² = a² + ap + p² = {plus}"),
        witness,
        "both quadratic forms square is the concordant pair system, which has no solution",
    ));

    let witness = match as_perfect_square(&minus) {
        Some(q) => confirmed(TriangleConfig::new(a.clone(), p.clone(), q, gap.clone()))?,
        None => None,
    };
    cases.push(verdict(
        "on_ray_ab",
        AngleTag::PiOver3,
        format!("k = |a − p| = {gap}, q² = a² − ap + p² = {minus}"),
        witness,
        "Eisenstein triple for the 60° form",
    ));

    cases.push(verdict(
        "right_angle",
        AngleTag::PiOver2,
        format!("q² = a² + p² = {}, k² = a² + p² ± ap√3", a * a + p * p),
        None,
        "ap√3 is irrational for ap ≠ 0",
    ));

    let witness = match as_perfect_square(&minus) {
        Some(k) => confirmed(TriangleConfig::new(a.clone(), p.clone(), gap.clone(), k))?,
        None => None,
    };
    cases.push(verdict(
        "on_ray_ac",
        AngleTag::Zero,
        format!("q = |a − p| = {gap}, k² = a² − ap + p² = {minus}"),
        witness,
        "Eisenstein triple for the 60° form",
    ));

    Ok(CaseReport { cases })
}

/// The three possibilities for a commensurable angle `AMC` other than `0` and
/// `π`, given `p = MA` and `q = MC`.
///
/// At `2π/3` the side is fixed and the residual factors as
/// `−((p + q)² − k²)(k² − (p² − pq + q²))`; the second branch would make both
/// quadratic forms square, so `k = p + q`. At `π/3` the same argument on the
/// other factorization leaves `k = |p − q|`.
pub fn m_angle_cases(p: &Integer, q: &Integer) -> Result<CaseReport> {
    if !positive(&[p, q]) {
        return Err(Error::Domain("distances must be positive".into()));
    }
    let plus = p * p + p * q + q * q;
    let minus = p * p - p * q + q * q;
    let mut cases = Vec::new();

    let witness = match as_perfect_square(&plus) {
        Some(a) => {
            let k = p + q;
            let cfg = TriangleConfig::new(a.clone(), p.clone(), q.clone(), k.clone());
            if !factorization_defect_by_side(&a, p, q, &k).is_zero() || !cfg.residual().is_zero() {
                return Err(Error::Consistency(
                    "forced branch k = p + q leaves a residual".into(),
                ));
            }
            if as_perfect_square(&minus).is_some() {
                return Err(Error::Consistency(format!(
                    "both {plus} and {minus} are squares"
                )));
            }
            confirmed(cfg)?
        }
        None => None,
    };
    cases.push(verdict(
        "TwoPiOver3",
        AngleTag::TwoPiOver3,
        format!("a² = p² + pq + q² = {plus}, k = p + q"),
        witness,
        "the other branch k² = p² − pq + q² is the concordant pair system",
    ));

    cases.push(verdict(
        "PiOver2",
        AngleTag::PiOver2,
        format!("a² = p² + q² = {}, k² = p² + q² ± pq√3", p * p + q * q),
        None,
        "pq√3 is irrational for pq ≠ 0",
    ));

    let witness = match as_perfect_square(&minus) {
        Some(a) => {
            let k = (p - q).abs();
            let cfg = TriangleConfig::new(a.clone(), p.clone(), q.clone(), k.clone());
            if !factorization_defect_by_distance(&a, p, q, &k).is_zero()
                || !cfg.residual().is_zero()
            {
                return Err(Error::Consistency(
                    "forced branch k = |p − q| leaves a residual".into(),
                ));
            }
            confirmed(cfg)?
        }
        None => None,
    };
    cases.push(verdict(
        "PiOver3",
        AngleTag::PiOver3,
        format!("a² = p² − pq + q² = {minus}, k = |p − q|"),
        witness,
        "the other branch k² = p² + pq + q² is the concordant pair system",
    ));

    Ok(CaseReport { cases })
}
