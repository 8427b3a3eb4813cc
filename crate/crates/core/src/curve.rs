//! Curve parameters and point types.
//!
//! Two curves are built in: secp160r1 (the target) and a 23-point-field toy
//! curve small enough for exhaustive group enumeration in tests. Both have
//! a = -3 so they share the same doubling code path.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::EccError;
use crate::field::{FieldElement, Modulus};
use crate::reference;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffinePoint {
    pub x: FieldElement,
    pub y: FieldElement,
    pub infinity: bool,
}

impl AffinePoint {
    pub fn new(x: FieldElement, y: FieldElement) -> Self {
        AffinePoint {
            x,
            y,
            infinity: false,
        }
    }

    pub fn infinity(curve: &CurveParams) -> Self {
        AffinePoint {
            x: curve.p.zero(),
            y: curve.p.zero(),
            infinity: true,
        }
    }

    pub fn negate(&self, curve: &CurveParams) -> Self {
        if self.infinity {
            *self
        } else {
            AffinePoint {
                x: self.x,
                y: curve.p.neg_raw(&self.y),
                infinity: false,
            }
        }
    }
}

/// Two points sharing one implicit Jacobian Z coordinate.
/// (X1, Y1) and (X2, Y2) are the X and Y coordinates after scaling by Z^2
/// and Z^3 respectively; Z itself is never materialized.
#[derive(Debug, Clone, Copy)]
pub struct CoZPair {
    pub x1: FieldElement,
    pub y1: FieldElement,
    pub x2: FieldElement,
    pub y2: FieldElement,
}

#[derive(Debug, Clone)]
pub struct CurveParams {
    pub name: String,
    /// Field prime context.
    pub p: Modulus,
    pub a: FieldElement,
    pub b: FieldElement,
    pub g: AffinePoint,
    /// Group order q (prime for both built-in curves).
    pub order: BigUint,
    /// Bit length used when sampling ephemeral scalars so every signature
    /// drives a ladder of identical length.
    pub nonce_bits: u32,
}

impl CurveParams {
    pub fn new(
        name: impl Into<String>,
        p_hex: &str,
        a_hex: &str,
        b_hex: &str,
        gx_hex: &str,
        gy_hex: &str,
        order_hex: &str,
        nonce_bits: u32,
    ) -> Result<Self, EccError> {
        let name = name.into();
        let p = Modulus::from_hex(format!("{name}/p"), p_hex)?;
        let parse = |h: &str| {
            BigUint::parse_bytes(h.as_bytes(), 16)
                .ok_or_else(|| EccError::InvalidCurve(format!("bad hex in {name}")))
        };
        let a = p.fe(&parse(a_hex)?);
        let b = p.fe(&parse(b_hex)?);
        let g = AffinePoint::new(p.fe(&parse(gx_hex)?), p.fe(&parse(gy_hex)?));
        let order = parse(order_hex)?;
        let curve = CurveParams {
            name,
            p,
            a,
            b,
            g,
            order,
            nonce_bits,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// SEC 2 secp160r1. The order is 161 bits; nonces are sampled as 160-bit
    /// scalars so the ladder length is uniform across signatures.
    pub fn secp160r1() -> &'static CurveParams {
        static CURVE: OnceLock<CurveParams> = OnceLock::new();
        CURVE.get_or_init(|| {
            CurveParams::new(
                "secp160r1",
                "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF7FFFFFFF",
                "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF7FFFFFFC",
                "1C97BEFC54BD7A8B65ACF89F81D4D4ADC565FA45",
                "4A96B5688EF573284664698968C38BB913CBFC82",
                "23A628553168947D59DCC912042351377AC5FB32",
                "0100000000000000000001F4C8F927AED3CA752257",
                160,
            )
            .expect("secp160r1 parameters are valid")
        })
    }

    /// Toy curve y^2 = x^3 - 3x + 8 over F_23, prime order 31, G = (3, 7).
    /// Small enough that every scalar can be checked against exhaustive
    /// enumeration.
    pub fn test_curve_p23() -> &'static CurveParams {
        static CURVE: OnceLock<CurveParams> = OnceLock::new();
        CURVE.get_or_init(|| {
            CurveParams::new("test-p23", "17", "14", "08", "03", "07", "1F", 5)
                .expect("test curve parameters are valid")
        })
    }

    pub fn by_name(name: &str) -> Option<&'static CurveParams> {
        match name {
            "secp160r1" => Some(Self::secp160r1()),
            "test-p23" => Some(Self::test_curve_p23()),
            _ => None,
        }
    }

    pub fn is_on_curve(&self, pt: &AffinePoint) -> bool {
        if pt.infinity {
            return true;
        }
        let y2 = self.p.mul_raw(&pt.y, &pt.y);
        let x2 = self.p.mul_raw(&pt.x, &pt.x);
        let x3 = self.p.mul_raw(&x2, &pt.x);
        let ax = self.p.mul_raw(&self.a, &pt.x);
        let rhs = self.p.add_raw(&self.p.add_raw(&x3, &ax), &self.b);
        y2 == rhs
    }

    fn validate(&self) -> Result<(), EccError> {
        // 4a^3 + 27b^2 != 0 (mod p)
        let a2 = self.p.mul_raw(&self.a, &self.a);
        let a3 = self.p.mul_raw(&a2, &self.a);
        let b2 = self.p.mul_raw(&self.b, &self.b);
        let four_a3 = self.p.mul_raw(&self.p.fe_u64(4), &a3);
        let t27_b2 = self.p.mul_raw(&self.p.fe_u64(27), &b2);
        if self.p.add_raw(&four_a3, &t27_b2).is_zero() {
            return Err(EccError::InvalidCurve(format!("{} is singular", self.name)));
        }
        if !self.is_on_curve(&self.g) {
            return Err(EccError::InvalidCurve(format!(
                "{}: generator is not on the curve",
                self.name
            )));
        }
        if self.order < BigUint::from(5u8) {
            return Err(EccError::InvalidCurve(format!(
                "{}: order too small",
                self.name
            )));
        }
        // q * G must be the point at infinity.
        let g = reference::from_affine(&self.g);
        if reference::scalar_mul(self, &self.order, &g).is_some() {
            return Err(EccError::InvalidCurve(format!(
                "{}: order does not annihilate the generator",
                self.name
            )));
        }
        // (q-1) * G must not be infinity (G has full order).
        let qm1 = &self.order - BigUint::one();
        if reference::scalar_mul(self, &qm1, &g).is_none() {
            return Err(EccError::InvalidCurve(format!(
                "{}: generator order divides q-1",
                self.name
            )));
        }
        Ok(())
    }
}
