//! Fixed-width multi-precision arithmetic on 6 x 32-bit little-endian limbs.
//!
//! 192 bits of width covers both the secp160r1 field prime (160 bits) and the
//! group order (161 bits). Carries and borrows are explicit so the callers can
//! observe the conditions that drive conditional modular reductions.

use std::cmp::Ordering;

pub const LIMBS: usize = 6;

pub type Limbs = [u32; LIMBS];
pub type WideLimbs = [u32; 2 * LIMBS];

pub const ZERO: Limbs = [0; LIMBS];

/// a + b with carry-out.
pub fn add(a: &Limbs, b: &Limbs) -> (Limbs, bool) {
    let mut out = ZERO;
    let mut carry = 0u64;
    for i in 0..LIMBS {
        let t = a[i] as u64 + b[i] as u64 + carry;
        out[i] = t as u32;
        carry = t >> 32;
    }
    (out, carry != 0)
}

/// a - b with borrow-out (borrow set iff a < b).
pub fn sub(a: &Limbs, b: &Limbs) -> (Limbs, bool) {
    let mut out = ZERO;
    let mut borrow = 0i64;
    for i in 0..LIMBS {
        let t = a[i] as i64 - b[i] as i64 - borrow;
        out[i] = t as u32;
        borrow = (t < 0) as i64;
    }
    (out, borrow != 0)
}

pub fn cmp(a: &Limbs, b: &Limbs) -> Ordering {
    for i in (0..LIMBS).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => {}
            ord => return ord,
        }
    }
    Ordering::Equal
}

pub fn is_zero(a: &Limbs) -> bool {
    a.iter().all(|&w| w == 0)
}

pub fn bit(a: &Limbs, i: u32) -> bool {
    let limb = (i / 32) as usize;
    limb < LIMBS && (a[limb] >> (i % 32)) & 1 == 1
}

pub fn bits(a: &Limbs) -> u32 {
    for i in (0..LIMBS).rev() {
        if a[i] != 0 {
            return 32 * i as u32 + (32 - a[i].leading_zeros());
        }
    }
    0
}

/// Schoolbook 6x6 product into 12 limbs.
pub fn mul_wide(a: &Limbs, b: &Limbs) -> WideLimbs {
    let mut out = [0u32; 2 * LIMBS];
    for i in 0..LIMBS {
        let mut carry = 0u64;
        for j in 0..LIMBS {
            let t = a[i] as u64 * b[j] as u64 + out[i + j] as u64 + carry;
            out[i + j] = t as u32;
            carry = t >> 32;
        }
        out[i + LIMBS] = carry as u32;
    }
    out
}

/// Shift right by one bit with an incoming top bit.
pub fn shr1(a: &Limbs, carry_in: bool) -> Limbs {
    let mut out = ZERO;
    let mut carry = carry_in as u32;
    for i in (0..LIMBS).rev() {
        out[i] = (a[i] >> 1) | (carry << 31);
        carry = a[i] & 1;
    }
    out
}

/// Remainder of a 12-limb value modulo a 6-limb modulus (Knuth algorithm D).
///
/// `sig` is the number of significant limbs of the modulus (top limb nonzero).
pub fn rem_wide(num: &WideLimbs, modulus: &Limbs, sig: usize) -> Limbs {
    debug_assert!(sig >= 1 && sig <= LIMBS && modulus[sig - 1] != 0);
    if sig == 1 {
        let m = modulus[0] as u64;
        let mut rem = 0u64;
        for i in (0..2 * LIMBS).rev() {
            rem = ((rem << 32) | num[i] as u64) % m;
        }
        let mut out = ZERO;
        out[0] = rem as u32;
        return out;
    }

    let n = sig;
    let shift = modulus[n - 1].leading_zeros();

    // Normalized divisor.
    let mut v = [0u32; LIMBS];
    if shift == 0 {
        v[..n].copy_from_slice(&modulus[..n]);
    } else {
        for i in (1..n).rev() {
            v[i] = (modulus[i] << shift) | (modulus[i - 1] >> (32 - shift));
        }
        v[0] = modulus[0] << shift;
    }

    // Normalized dividend, one extra limb for the shifted-out bits.
    let mut u = [0u32; 2 * LIMBS + 1];
    if shift == 0 {
        u[..2 * LIMBS].copy_from_slice(num);
    } else {
        u[2 * LIMBS] = num[2 * LIMBS - 1] >> (32 - shift);
        for i in (1..2 * LIMBS).rev() {
            u[i] = (num[i] << shift) | (num[i - 1] >> (32 - shift));
        }
        u[0] = num[0] << shift;
    }

    const B: u64 = 1 << 32;
    let m = 2 * LIMBS - n;
    for j in (0..=m).rev() {
        let top = ((u[j + n] as u64) << 32) | u[j + n - 1] as u64;
        let mut qhat = top / v[n - 1] as u64;
        let mut rhat = top % v[n - 1] as u64;
        while qhat >= B || qhat * v[n - 2] as u64 > ((rhat << 32) | u[j + n - 2] as u64) {
            qhat -= 1;
            rhat += v[n - 1] as u64;
            if rhat >= B {
                break;
            }
        }

        // u[j..j+n+1] -= qhat * v
        let mut carry = 0u64;
        let mut borrow = 0i64;
        for i in 0..n {
            let p = qhat * v[i] as u64 + carry;
            carry = p >> 32;
            let d = u[j + i] as i64 - (p & 0xFFFF_FFFF) as i64 - borrow;
            u[j + i] = d as u32;
            borrow = (d < 0) as i64;
        }
        let d = u[j + n] as i64 - carry as i64 - borrow;
        u[j + n] = d as u32;

        if d < 0 {
            // qhat was one too large; add the divisor back.
            let mut carry = 0u64;
            for i in 0..n {
                let t = u[j + i] as u64 + v[i] as u64 + carry;
                u[j + i] = t as u32;
                carry = t >> 32;
            }
            u[j + n] = (u[j + n] as u64 + carry) as u32;
        }
    }

    // Denormalize the remainder in u[0..n].
    let mut out = ZERO;
    if shift == 0 {
        out[..n].copy_from_slice(&u[..n]);
    } else {
        for i in 0..n {
            out[i] = (u[i] >> shift) | ((u[i + 1] as u64) << (32 - shift)) as u32;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn to_big(a: &[u32]) -> BigUint {
        let mut v = BigUint::default();
        for &w in a.iter().rev() {
            v = (v << 32u32) | BigUint::from(w);
        }
        v
    }

    fn random_limbs(rng: &mut impl Rng, max_bits: u32) -> Limbs {
        let mut out = ZERO;
        for (i, w) in out.iter_mut().enumerate() {
            let lo = 32 * i as u32;
            if lo >= max_bits {
                break;
            }
            *w = rng.gen();
            let avail = max_bits - lo;
            if avail < 32 {
                *w &= (1u32 << avail) - 1;
            }
        }
        out
    }

    #[test]
    fn add_sub_roundtrip() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let a = random_limbs(&mut rng, 191);
            let b = random_limbs(&mut rng, 191);
            let (s, carry) = add(&a, &b);
            assert!(!carry);
            let (d, borrow) = sub(&s, &b);
            assert!(!borrow);
            assert_eq!(d, a);
        }
    }

    #[test]
    fn rem_wide_matches_bigint() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let mut all: Vec<Limbs> = vec![{
            let mut m = ZERO;
            m[0] = 23;
            m
        }];
        let p = BigUint::parse_bytes(b"FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF7FFFFFFF", 16).unwrap();
        let q = BigUint::parse_bytes(b"0100000000000000000001F4C8F927AED3CA752257", 16).unwrap();
        for m in [&p, &q] {
            let digits = m.to_u32_digits();
            let mut l = ZERO;
            l[..digits.len()].copy_from_slice(&digits);
            all.push(l);
        }
        for m in &all {
            let sig = (0..LIMBS).rev().find(|&i| m[i] != 0).unwrap() + 1;
            let mb = to_big(m);
            for _ in 0..5000 {
                let a = random_limbs(&mut rng, 191);
                let b = random_limbs(&mut rng, 191);
                let wide = mul_wide(&a, &b);
                assert_eq!(to_big(&wide), to_big(&a) * to_big(&b));
                let r = rem_wide(&wide, m, sig);
                assert_eq!(to_big(&r), (to_big(&a) * to_big(&b)) % &mb);
            }
        }
    }

    #[test]
    fn shr1_halves() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = random_limbs(&mut rng, 192);
            let carry = rng.gen_bool(0.5);
            let h = shr1(&a, carry);
            let expect = (to_big(&a) + (BigUint::from(carry as u8) << 192u32)) >> 1u32;
            assert_eq!(to_big(&h), expect);
        }
    }
}
