//! Exact dyadic numbers `m·2^x` with normalized representation: the carrier
//! for dense-base values and radius bookkeeping. All arithmetic and
//! comparisons are exact; no floating point is involved anywhere.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::nat::{self, pair4, split4, unpair_u64, zigzag_unrank, Nat};

/// An exact number `mantissa · 2^exponent`.
///
/// Normalized so that the mantissa is zero or odd, and zero carries
/// exponent zero; equal values therefore have equal representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: BigInt,
}

impl Dyadic {
    pub const fn raw(mantissa: BigInt, exponent: BigInt) -> Self {
        Dyadic { mantissa, exponent }
    }

    /// Normalizing constructor.
    pub fn new(mantissa: BigInt, exponent: BigInt) -> Self {
        if mantissa.is_zero() {
            return Dyadic {
                mantissa: BigInt::zero(),
                exponent: BigInt::zero(),
            };
        }
        let tz = mantissa.trailing_zeros().unwrap_or(0);
        Dyadic {
            mantissa: mantissa >> tz,
            exponent: exponent + tz,
        }
    }

    pub fn zero() -> Self {
        Dyadic::new(BigInt::zero(), BigInt::zero())
    }

    pub fn one() -> Self {
        Dyadic::new(BigInt::one(), BigInt::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), BigInt::zero())
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic::new(BigInt::one(), BigInt::from(e))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> &BigInt {
        &self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent.clone(),
        }
    }

    /// Multiply by `2^k`.
    pub fn scale_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: &self.exponent + k,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Exact conversion to a rational. `None` if the exponent magnitude does
    /// not fit a shift count, which cannot occur for desk-scale values.
    pub fn to_rational(&self) -> Option<BigRational> {
        let m = self.mantissa.clone();
        if self.exponent.is_negative() {
            let sh = usize::try_from((-&self.exponent).magnitude()).ok()?;
            Some(BigRational::new(m, BigInt::one() << sh))
        } else {
            let sh = usize::try_from(self.exponent.magnitude()).ok()?;
            Some(BigRational::from_integer(m << sh))
        }
    }

    /// Mantissas aligned to the smaller exponent; shared exponent returned.
    fn aligned(&self, other: &Self) -> (BigInt, BigInt, BigInt) {
        let (lo, a, b) = if self.exponent <= other.exponent {
            (self.exponent.clone(), self, other)
        } else {
            (other.exponent.clone(), other, self)
        };
        let sh = usize::try_from((&b.exponent - &lo).magnitude())
            .expect("dyadic exponent gap exceeds addressable memory");
        let bm = &b.mantissa << sh;
        if std::ptr::eq(a, self) {
            (a.mantissa.clone(), bm, lo)
        } else {
            (bm, a.mantissa.clone(), lo)
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let ls = self.mantissa.sign();
        let rs = other.mantissa.sign();
        let sign_rank = |s: Sign| match s {
            Sign::Minus => 0u8,
            Sign::NoSign => 1,
            Sign::Plus => 2,
        };
        if sign_rank(ls) != sign_rank(rs) {
            return sign_rank(ls).cmp(&sign_rank(rs));
        }
        if ls == Sign::NoSign {
            return Ordering::Equal;
        }
        // Same nonzero sign. Magnitude of m·2^x lies in [2^(bits(m)-1+x), 2^(bits(m)+x)),
        // so disjoint log ranges decide without aligning.
        let lhi = BigInt::from(self.mantissa.bits()) + &self.exponent;
        let rhi = BigInt::from(other.mantissa.bits()) + &other.exponent;
        let llo = &lhi - 1;
        let rlo = &rhi - 1;
        let mag = if llo >= rhi {
            Ordering::Greater
        } else if rlo >= lhi {
            Ordering::Less
        } else {
            // Overlapping ranges force the exponent gap below bits(m)+bits(m')+2.
            let (a, b, _) = self.aligned(other);
            return a.cmp(&b);
        };
        if ls == Sign::Minus {
            mag.reverse()
        } else {
            mag
        }
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return -rhs.clone();
        }
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a - b, e)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, &self.exponent + &rhs.exponent)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent.is_zero() {
            write!(f, "{}", self.mantissa)
        } else {
            write!(f, "{}*2^{}", self.mantissa, self.exponent)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

/// Parse error for [`Dyadic::from_str`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid dyadic literal {input:?}: {reason}")]
pub struct ParseDyadicError {
    pub input: String,
    pub reason: &'static str,
}

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    /// Accepts `m`, `m*2^e`, and `p/q` with `q` a power of two.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason| ParseDyadicError {
            input: s.to_string(),
            reason,
        };
        let t = s.trim();
        if let Some((m, e)) = t.split_once("*2^") {
            let m = BigInt::from_str(m.trim()).map_err(|_| fail("bad mantissa"))?;
            let e = BigInt::from_str(e.trim()).map_err(|_| fail("bad exponent"))?;
            return Ok(Dyadic::new(m, e));
        }
        if let Some((p, q)) = t.split_once('/') {
            let p = BigInt::from_str(p.trim()).map_err(|_| fail("bad numerator"))?;
            let q = BigInt::from_str(q.trim()).map_err(|_| fail("bad denominator"))?;
            if q.is_zero() || q.is_negative() {
                return Err(fail("denominator must be a positive power of two"));
            }
            let tz = q.trailing_zeros().unwrap_or(0);
            if (&q >> tz) != BigInt::one() {
                return Err(fail("denominator must be a positive power of two"));
            }
            return Ok(Dyadic::new(p, BigInt::from(-(tz as i64))));
        }
        let m = BigInt::from_str(t).map_err(|_| fail("bad integer"))?;
        Ok(Dyadic::new(m, BigInt::zero()))
    }
}

/// Decode `⟨a, b, c, e⟩` as the dyadic `(a - b) · 2^(c - e)`. Total.
pub fn dyadic_decode(code: &Nat) -> Dyadic {
    let (a, b, c, e) = split4(code);
    let m = BigInt::from(a) - BigInt::from(b);
    let x = BigInt::from(c) - BigInt::from(e);
    Dyadic::new(m, x)
}

/// Canonical code for a dyadic: non-negative parts split over `(a, b)` and
/// `(c, e)`. A right inverse of [`dyadic_decode`].
pub fn dyadic_encode(d: &Dyadic) -> Nat {
    let zero = Nat::zero();
    let (a, b) = if d.mantissa.is_negative() {
        (zero.clone(), d.mantissa.magnitude().clone())
    } else {
        (d.mantissa.magnitude().clone(), zero.clone())
    };
    let (c, e) = if d.exponent.is_negative() {
        (zero, d.exponent.magnitude().clone())
    } else {
        (d.exponent.magnitude().clone(), zero)
    };
    pair4(&a, &b, &c, &e)
}

/// The `r`-th dyadic in a fair zig-zag sweep of (mantissa, exponent) pairs.
/// Rank 0 is zero; small mantissas and small exponent magnitudes come first.
pub fn dyadic_rank(r: u64) -> Dyadic {
    if r == 0 {
        return Dyadic::zero();
    }
    let (u, v) = unpair_u64(r - 1);
    let magnitude = BigInt::from(u / 2 * 2 + 1);
    let mantissa = if u % 2 == 0 { magnitude } else { -magnitude };
    let exponent = -zigzag_unrank(&nat::nat(v)); // negative exponents first
    Dyadic::raw(mantissa, exponent)
}

/// Positive dyadic bound `c · 2^(-e)` with natural `c, e`, exactly
/// representing the value when one exists.
pub fn bound_code(value: &Dyadic) -> Option<(Nat, Nat)> {
    if !value.is_positive() {
        return None;
    }
    let c: BigUint = value.mantissa.magnitude().clone();
    if value.exponent.is_negative() {
        let e = value.exponent.magnitude().clone();
        Some((c, e))
    } else {
        // Fold a non-negative exponent into the coefficient.
        let sh = usize::try_from(value.exponent.magnitude()).ok()?;
        Some((c << sh, Nat::zero()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::nat::{nat, pair4};
    use num_integer::Integer;
    use proptest::prelude::*;

    fn code4(a: u64, b: u64, c: u64, e: u64) -> Nat {
        pair4(&nat(a), &nat(b), &nat(c), &nat(e))
    }

    #[test]
    fn decode_examples() {
        assert_eq!(dyadic_decode(&code4(3, 1, 0, 1)), Dyadic::one());
        assert_eq!(dyadic_decode(&code4(0, 1, 0, 0)), Dyadic::from_int(-1));
        assert_eq!(dyadic_decode(&code4(5, 5, 9, 2)), Dyadic::zero());
    }

    #[test]
    fn encode_round_trips() {
        for r in 0..500 {
            let d = dyadic_rank(r);
            assert_eq!(dyadic_decode(&dyadic_encode(&d)), d);
        }
    }

    #[test]
    fn rank_sweep_is_injective_and_normalized() {
        let mut seen = std::collections::HashSet::new();
        for r in 0..2000 {
            let d = dyadic_rank(r);
            assert!(d.mantissa().is_zero() || d.mantissa().is_odd());
            assert!(seen.insert(d.to_string()), "duplicate at rank {r}");
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!("7*2^-3".parse::<Dyadic>().unwrap(), "7/8".parse().unwrap());
        assert_eq!("-12".parse::<Dyadic>().unwrap(), Dyadic::from_int(-12));
        assert_eq!("4/2".parse::<Dyadic>().unwrap(), Dyadic::from_int(2));
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("1.5".parse::<Dyadic>().is_err());
    }

    #[test]
    fn bound_codes_are_exact() {
        let v = "3/16".parse::<Dyadic>().unwrap();
        let (c, e) = bound_code(&v).unwrap();
        assert_eq!((c, e), (nat(3), nat(4)));
        let w = Dyadic::from_int(6);
        let (c, e) = bound_code(&w).unwrap();
        assert_eq!((c, e), (nat(6), nat(0)));
        assert!(bound_code(&Dyadic::zero()).is_none());
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (-1_000_000i64..1_000_000, -40i64..40)
            .prop_map(|(m, e)| Dyadic::new(BigInt::from(m), BigInt::from(e)))
    }

    proptest! {
        // Oracle: arbitrary-precision rational arithmetic.
        #[test]
        fn matches_rational_arithmetic(a in arb_dyadic(), b in arb_dyadic()) {
            let (ra, rb) = (a.to_rational().unwrap(), b.to_rational().unwrap());
            prop_assert_eq!((&a + &b).to_rational().unwrap(), &ra + &rb);
            prop_assert_eq!((&a - &b).to_rational().unwrap(), &ra - &rb);
            prop_assert_eq!((&a * &b).to_rational().unwrap(), &ra * &rb);
            prop_assert_eq!(a.cmp(&b), ra.cmp(&rb));
            prop_assert_eq!(a.clone().max(b.clone()).to_rational().unwrap(), ra.clone().max(rb.clone()));
            prop_assert_eq!(a.min(b).to_rational().unwrap(), ra.min(rb));
        }

        #[test]
        fn decode_total_on_codes(n in 0u64..50_000_000) {
            let d = dyadic_decode(&nat(n));
            let _ = d.to_rational().unwrap();
        }
    }
}
