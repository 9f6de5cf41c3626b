//! Natural-number codes: Cantor pairing, left-nested tupling, and the
//! zig-zag rankings used to sweep signed quantities fairly.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Roots;
use num_traits::{One, Zero};

use super::KernelError;

/// Code carrier for everything index-level: points, basic opens, tuples.
pub type Nat = BigUint;

/// Shorthand for lifting a machine word into a code.
pub fn nat(n: u64) -> Nat {
    BigUint::from(n)
}

/// Cantor pairing `(a + b)(a + b + 1)/2 + b`, a bijection from pairs onto codes.
pub fn pair(a: &Nat, b: &Nat) -> Nat {
    let s = a + b;
    (&s * (&s + 1u32)) / 2u32 + b
}

/// Inverse of [`pair`].
pub fn unpair(n: &Nat) -> (Nat, Nat) {
    // w = floor((sqrt(8n + 1) - 1) / 2) is the diagonal index.
    let w = ((n * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let b = n - t;
    let a = w - &b;
    (a, b)
}

/// Machine-word pairing for schedule ticks. Panics on overflow, which at
/// desk scale would require ~2^32 interleaved streams.
pub fn pair_u64(a: u64, b: u64) -> u64 {
    let s = a as u128 + b as u128;
    let v = s * (s + 1) / 2 + b as u128;
    u64::try_from(v).expect("schedule tick overflow")
}

/// Machine-word unpairing used by fixed diagonal schedules.
pub fn unpair_u64(n: u64) -> (u64, u64) {
    let n = n as u128;
    let w = (((8 * n + 1).sqrt() - 1) / 2) as u128;
    let t = w * (w + 1) / 2;
    let b = n - t;
    let a = w - b;
    (a as u64, b as u64)
}

/// Left-nested tuple code `⟨⟨x_1, …, x_{n-1}⟩, x_n⟩`. Arity must be at least 2.
pub fn tuple(xs: &[Nat]) -> Result<Nat, KernelError> {
    if xs.len() < 2 {
        return Err(KernelError::TupleArity { len: xs.len() });
    }
    let mut acc = pair(&xs[0], &xs[1]);
    for x in &xs[2..] {
        acc = pair(&acc, x);
    }
    Ok(acc)
}

/// Inverse of [`tuple`] at a fixed arity.
pub fn untuple(n: &Nat, len: usize) -> Result<Vec<Nat>, KernelError> {
    if len < 2 {
        return Err(KernelError::TupleArity { len });
    }
    let mut parts = Vec::with_capacity(len);
    let mut rest = n.clone();
    for _ in 0..len - 1 {
        let (head, last) = unpair(&rest);
        parts.push(last);
        rest = head;
    }
    parts.push(rest);
    parts.reverse();
    Ok(parts)
}

/// `⟨a, b, c⟩` without the arity check.
pub fn pair3(a: &Nat, b: &Nat, c: &Nat) -> Nat {
    pair(&pair(a, b), c)
}

/// `⟨a, b, c, e⟩` without the arity check.
pub fn pair4(a: &Nat, b: &Nat, c: &Nat, e: &Nat) -> Nat {
    pair(&pair3(a, b, c), e)
}

pub fn split3(n: &Nat) -> (Nat, Nat, Nat) {
    let (ab, c) = unpair(n);
    let (a, b) = unpair(&ab);
    (a, b, c)
}

pub fn split4(n: &Nat) -> (Nat, Nat, Nat, Nat) {
    let (abc, e) = unpair(n);
    let (a, b, c) = split3(&abc);
    (a, b, c, e)
}

/// Zig-zag rank of a signed integer: 0, 1, -1, 2, -2, … at ranks 0, 1, 2, 3, 4.
pub fn zigzag_rank(i: &BigInt) -> Nat {
    match i.sign() {
        Sign::NoSign => Nat::zero(),
        Sign::Plus => (i.magnitude() * 2u32) - 1u32,
        Sign::Minus => i.magnitude() * 2u32,
    }
}

/// Inverse of [`zigzag_rank`].
pub fn zigzag_unrank(u: &Nat) -> BigInt {
    if u.is_zero() {
        BigInt::zero()
    } else if (u % 2u32).is_one() {
        BigInt::from((u + 1u32) / 2u32)
    } else {
        -BigInt::from(u / 2u32)
    }
}

/// Attempt to view a code as a machine word.
pub fn to_u64(n: &Nat) -> Option<u64> {
    u64::try_from(n).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pair_base_cases() {
        assert_eq!(pair(&nat(0), &nat(0)), nat(0));
        assert_eq!(pair(&nat(1), &nat(0)), nat(1));
        assert_eq!(unpair(&pair(&nat(3), &nat(5))), (nat(3), nat(5)));
    }

    #[test]
    fn tuple_is_left_nested() {
        let (a, b, c) = (nat(4), nat(7), nat(9));
        assert_eq!(tuple(&[a.clone(), b.clone()]).unwrap(), pair(&a, &b));
        assert_eq!(
            tuple(&[a.clone(), b.clone(), c.clone()]).unwrap(),
            pair(&pair(&a, &b), &c)
        );
        let xs = vec![nat(1), nat(2), nat(3)];
        let code = tuple(&xs).unwrap();
        assert_eq!(untuple(&code, 3).unwrap(), xs);
    }

    #[test]
    fn tuple_rejects_short_inputs() {
        assert!(matches!(
            tuple(&[nat(1)]),
            Err(KernelError::TupleArity { len: 1 })
        ));
        assert!(untuple(&nat(10), 1).is_err());
    }

    #[test]
    fn unpair_u64_matches_bignum_route() {
        for t in 0..5000u64 {
            let (a, b) = unpair_u64(t);
            let (x, y) = unpair(&nat(t));
            assert_eq!((nat(a), nat(b)), (x, y));
        }
    }

    proptest! {
        #[test]
        fn pair_round_trips(a in 0u64..1_000_000, b in 0u64..1_000_000) {
            let code = pair(&nat(a), &nat(b));
            prop_assert_eq!(unpair(&code), (nat(a), nat(b)));
        }

        #[test]
        fn unpair_round_trips(n in 0u64..10_000_000) {
            let (a, b) = unpair(&nat(n));
            prop_assert_eq!(pair(&a, &b), nat(n));
        }

        #[test]
        fn zigzag_round_trips(i in -1_000_000i64..1_000_000) {
            let z = BigInt::from(i);
            prop_assert_eq!(zigzag_unrank(&zigzag_rank(&z)), z);
        }

        #[test]
        fn untuple_inverts_tuple(xs in proptest::collection::vec(0u64..100_000, 2..6)) {
            let xs: Vec<Nat> = xs.into_iter().map(nat).collect();
            let code = tuple(&xs).unwrap();
            prop_assert_eq!(untuple(&code, xs.len()).unwrap(), xs);
        }
    }
}
