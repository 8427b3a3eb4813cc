//! Affine group law over arbitrary-precision integers.
//!
//! This is the slow, independent path: textbook chord-and-tangent formulas on
//! `BigUint` coordinates with double-and-add scalar multiplication. It backs
//! signature verification and serves as the oracle the instrumented ladder is
//! checked against. It shares no arithmetic with the limb-based field code.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::curve::{AffinePoint, CurveParams};

/// `None` is the point at infinity.
pub type RefPoint = Option<(BigUint, BigUint)>;

pub fn from_affine(pt: &AffinePoint) -> RefPoint {
    if pt.infinity {
        None
    } else {
        Some((pt.x.to_biguint(), pt.y.to_biguint()))
    }
}

pub fn to_affine(curve: &CurveParams, pt: &RefPoint) -> AffinePoint {
    match pt {
        None => AffinePoint::infinity(curve),
        Some((x, y)) => AffinePoint::new(curve.p.fe(x), curve.p.fe(y)),
    }
}

/// Modular inverse via the extended Euclidean algorithm.
pub fn modinv(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a % m);
    let m_int = BigInt::from(m.clone());
    if a.is_zero() {
        return None;
    }
    let (mut r0, mut r1) = (m_int.clone(), a);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if !r0.is_one() {
        return None;
    }
    let t0 = t0.mod_floor(&m_int);
    Some(t0.magnitude().clone())
}

fn fe_sub(p: &BigUint, a: &BigUint, b: &BigUint) -> BigUint {
    ((p + a) - (b % p)) % p
}

pub fn add(curve: &CurveParams, lhs: &RefPoint, rhs: &RefPoint) -> RefPoint {
    let p = curve.p.to_biguint();
    let (x1, y1) = match lhs {
        None => return rhs.clone(),
        Some(v) => v,
    };
    let (x2, y2) = match rhs {
        None => return lhs.clone(),
        Some(v) => v,
    };
    if x1 == x2 {
        if (y1 + y2) % &p == BigUint::zero() {
            return None;
        }
        return double(curve, lhs);
    }
    let num = fe_sub(&p, y2, y1);
    let den = fe_sub(&p, x2, x1);
    let lambda = (num * modinv(&den, &p).expect("nonzero denominator")) % &p;
    let x3 = fe_sub(&p, &(&lambda * &lambda % &p), &((x1 + x2) % &p));
    let y3 = fe_sub(&p, &(&lambda * fe_sub(&p, x1, &x3) % &p), y1);
    Some((x3, y3))
}

pub fn double(curve: &CurveParams, pt: &RefPoint) -> RefPoint {
    let p = curve.p.to_biguint();
    let a = curve.a.to_biguint();
    let (x, y) = match pt {
        None => return None,
        Some(v) => v,
    };
    if y.is_zero() {
        return None;
    }
    let num = (BigUint::from(3u8) * x * x + &a) % &p;
    let den = (BigUint::from(2u8) * y) % &p;
    let lambda = (num * modinv(&den, &p).expect("nonzero denominator")) % &p;
    let x3 = fe_sub(&p, &(&lambda * &lambda % &p), &((x + x) % &p));
    let y3 = fe_sub(&p, &(&lambda * fe_sub(&p, x, &x3) % &p), y);
    Some((x3, y3))
}

/// Double-and-add scalar multiplication, MSB first.
pub fn scalar_mul(curve: &CurveParams, k: &BigUint, pt: &RefPoint) -> RefPoint {
    let mut acc: RefPoint = None;
    if k.is_zero() {
        return acc;
    }
    for i in (0..k.bits()).rev() {
        acc = double(curve, &acc);
        if k.bit(i) {
            acc = add(curve, &acc, pt);
        }
    }
    acc
}

pub fn is_on_curve(curve: &CurveParams, pt: &RefPoint) -> bool {
    match pt {
        None => true,
        Some((x, y)) => {
            let p = curve.p.to_biguint();
            let lhs = y * y % &p;
            let rhs =
                (x * x % &p * x + curve.a.to_biguint() * x + curve.b.to_biguint()) % &p;
            lhs == rhs
        }
    }
}
