//! Exact integer and rational primitives shared by every engine.
//!
//! The public surface works on arbitrary-precision [`Integer`] and
//! [`Rational`]. The scans run their inner loops on machine words through the
//! `*_u64`/`*_u128` helpers below and fall back to the big-integer routines
//! whenever a checked operation overflows.

use num_bigint::{BigInt, Sign};
use num_integer::Integer as _;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision signed integer.
pub type Integer = BigInt;

/// Normalized fraction of two [`Integer`]s with a positive denominator.
pub type Rational = num_rational::BigRational;

const fn residue_table<const M: usize>() -> [bool; M] {
    let mut table = [false; M];
    let mut x = 0;
    while x < M {
        table[(x * x) % M] = true;
        x += 1;
    }
    table
}

static SQUARES_MOD_64: [bool; 64] = residue_table::<64>();
static SQUARES_MOD_63: [bool; 63] = residue_table::<63>();
static SQUARES_MOD_65: [bool; 65] = residue_table::<65>();
static SQUARES_MOD_11: [bool; 11] = residue_table::<11>();

/// 64 · 63 · 65 · 11; one reduction feeds all four residue tables.
const PREFILTER_MODULUS: u64 = 2_882_880;

#[inline]
fn passes_residue_tables(r: u64) -> bool {
    SQUARES_MOD_64[(r % 64) as usize]
        && SQUARES_MOD_63[(r % 63) as usize]
        && SQUARES_MOD_65[(r % 65) as usize]
        && SQUARES_MOD_11[(r % 11) as usize]
}

/// Quadratic-residue prefilter. `false` means `n` is certainly not a square.
#[inline]
pub fn may_be_square_u128(n: u128) -> bool {
    passes_residue_tables((n % PREFILTER_MODULUS as u128) as u64)
}

/// Floor square root of a machine word.
pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    if n < 1u128 << 104 {
        // f64 has 53 bits of mantissa, so the estimate is off by at most one
        // or two units here; walk it onto the exact floor.
        let mut r = (n as f64).sqrt() as u128;
        while r * r > n {
            r -= 1;
        }
        while (r + 1) * (r + 1) <= n {
            r += 1;
        }
        return r;
    }
    let bits = 128 - n.leading_zeros();
    let mut x = 1u128 << bits.div_ceil(2);
    loop {
        let y = (x + n / x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Square root of `n` when `n` is a perfect square.
#[inline]
pub fn square_root_u128(n: u128) -> Option<u128> {
    if !may_be_square_u128(n) {
        return None;
    }
    let r = isqrt_u128(n);
    (r * r == n).then_some(r)
}

/// Signed variant of [`square_root_u128`]; negative inputs are never squares.
#[inline]
pub fn square_root_i128(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    square_root_u128(n as u128).map(|r| r as i128)
}

#[inline]
pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Floor square root. Fails on negative input.
pub fn isqrt(n: &Integer) -> Result<Integer> {
    if n.is_negative() {
        return Err(Error::Domain(format!("isqrt of negative value {n}")));
    }
    if let Some(small) = n.to_u128() {
        return Ok(Integer::from(isqrt_u128(small)));
    }
    Ok(n.sqrt())
}

/// Returns the nonnegative root when `n` is a perfect square.
///
/// A residue test modulo 64, 63, 65 and 11 runs before the root extraction;
/// the filter only ever rejects non-squares.
pub fn as_perfect_square(n: &Integer) -> Option<Integer> {
    if n.sign() == Sign::Minus {
        return None;
    }
    if let Some(small) = n.to_u128() {
        return square_root_u128(small).map(Integer::from);
    }
    let residue = (n % PREFILTER_MODULUS)
        .to_u64()
        .expect("residue fits in u64");
    if !passes_residue_tables(residue) {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Nonnegative gcd, with `gcd(0, 0) = 0`.
pub fn gcd(a: &Integer, b: &Integer) -> Integer {
    a.gcd(b)
}

pub fn rational(num: impl Into<Integer>, den: impl Into<Integer>) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn rational_int(value: impl Into<Integer>) -> Rational {
    Rational::from_integer(value.into())
}

/// Renders a rational as `num/den`, or just `num` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom() == &Integer::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    text.trim()
        .parse::<Rational>()
        .map_err(|e| Error::Domain(format!("cannot parse rational {text:?}: {e}")))
}

/// Two-adic valuation of a nonzero integer.
pub fn two_adic_valuation(n: &Integer) -> Option<u64> {
    if n.is_zero() {
        None
    } else {
        n.trailing_zeros()
    }
}

/// Serde adapters: big integers travel as decimal strings and rationals as
/// `[numerator, denominator]` string pairs.
pub mod serde_exact {
    use super::{Integer, Rational};
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub mod int {
        use super::*;

        pub fn serialize<S: Serializer>(value: &Integer, s: S) -> Result<S::Ok, S::Error> {
            value.to_string().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Integer, D::Error> {
            let text = String::deserialize(d)?;
            text.parse().map_err(D::Error::custom)
        }
    }

    pub mod rat {
        use super::*;

        pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
            [value.numer().to_string(), value.denom().to_string()].serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
            let [num, den] = <[String; 2]>::deserialize(d)?;
            let num: Integer = num.parse().map_err(D::Error::custom)?;
            let den: Integer = den.parse().map_err(D::Error::custom)?;
            if den == Integer::from(0) {
                return Err(D::Error::custom("zero denominator"));
            }
            Ok(Rational::new(num, den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Pow};
    use proptest::prelude::*;

    fn int(v: i64) -> Integer {
        Integer::from(v)
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&int(0)).unwrap(), int(0));
        assert_eq!(isqrt(&int(17)).unwrap(), int(4));
        let big: Integer = Integer::from(10).pow(100u32);
        let root: Integer = Integer::from(10).pow(50u32);
        assert_eq!(&root * &root, big);
        assert_eq!(isqrt(&big).unwrap(), root);
        assert_eq!(isqrt(&(&big - 1)).unwrap(), &root - 1);
        assert!(matches!(isqrt(&int(-1)), Err(Error::Domain(_))));
    }

    #[test]
    fn perfect_square_examples() {
        assert_eq!(as_perfect_square(&int(49)), Some(int(7)));
        assert_eq!(as_perfect_square(&int(50)), None);
        assert_eq!(as_perfect_square(&int(10)), None);
        assert_eq!(as_perfect_square(&int(0)), Some(int(0)));
        assert_eq!(as_perfect_square(&int(-4)), None);
        let big: Integer = Integer::from(3).pow(201u32);
        assert_eq!(as_perfect_square(&(&big * &big)), Some(big.clone()));
        assert_eq!(as_perfect_square(&(&big * &big + 1)), None);
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(&int(12), &int(18)), int(6));
        assert_eq!(gcd(&int(7), &int(0)), int(7));
        assert_eq!(gcd(&int(0), &int(0)), int(0));
        assert_eq!(gcd(&int(-12), &int(18)), int(6));
        // (m² − n², 2mn) at (m, n) = (2, 1)
        assert_eq!(gcd(&int(3), &int(4)), int(1));
    }

    #[test]
    fn isqrt_word_boundaries() {
        for n in [
            u128::MAX,
            (1u128 << 104) - 1,
            1u128 << 104,
            u64::MAX as u128 * u64::MAX as u128,
        ] {
            let r = isqrt_u128(n);
            assert!(r.checked_mul(r).is_some_and(|sq| sq <= n));
            assert!((r + 1).checked_mul(r + 1).is_none_or(|sq| sq > n));
        }
    }

    #[test]
    fn prefilter_agrees_with_isqrt_on_a_million_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for i in 0..1_000_000u64 {
            // Mix raw values with squares and near-squares so both branches
            // are exercised.
            let n: u128 = match i % 3 {
                0 => rng.gen::<u64>() as u128,
                1 => {
                    let r = rng.gen::<u32>() as u128;
                    r * r
                }
                _ => {
                    let r = rng.gen::<u64>() as u128;
                    r * r + rng.gen_range(0..3)
                }
            };
            let r = isqrt_u128(n);
            assert_eq!(square_root_u128(n).is_some(), r * r == n, "n = {n}");
        }
    }

    #[test]
    fn rational_normalization() {
        let r = rational(-6, -4);
        assert_eq!(r.numer(), &int(3));
        assert_eq!(r.denom(), &int(2));
        let r = rational(6, -4) + rational(1, 4);
        assert_eq!(format_rational(&r), "-5/4");
        assert!(r.denom() > &Integer::zero());
        assert!(gcd(r.numer(), r.denom()).is_one());
        assert_eq!(parse_rational(" -1/2 ").unwrap(), rational(-1, 2));
        assert_eq!(parse_rational("3").unwrap(), rational_int(3));
        assert!(parse_rational("1/0").is_err() || parse_rational("x").is_err());
    }

    proptest! {
        #[test]
        fn isqrt_brackets_input(n in any::<u128>()) {
            let big = Integer::from(n);
            let r = isqrt(&big).unwrap();
            prop_assert!(&r * &r <= big);
            prop_assert!((&r + 1) * (&r + 1) > big);
        }

        #[test]
        fn big_square_test_matches_isqrt(hi in any::<u128>(), lo in any::<u64>()) {
            let n = (Integer::from(hi) << 64) + Integer::from(lo);
            let r = isqrt(&n).unwrap();
            prop_assert_eq!(as_perfect_square(&n).is_some(), &r * &r == n);
            let sq = &n * &n;
            prop_assert_eq!(as_perfect_square(&sq), Some(n));
        }

        #[test]
        fn arithmetic_stays_normalized(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let x = rational(a, b);
            let y = rational(c, d);
            for r in [&x + &y, &x - &y, &x * &y] {
                prop_assert!(r.denom() > &Integer::zero());
                prop_assert!(gcd(r.numer(), r.denom()).is_one());
            }
        }
    }
}
