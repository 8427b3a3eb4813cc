//! Instrumented modular arithmetic.
//!
//! A [`FieldElement`] is a canonical residue (value < modulus) in the context
//! of one [`Modulus`]. The add/sub/mul entry points append one [`OpEvent`] per
//! call to the active log; add and sub record whether the conditional
//! reduction fired, multiplication reduces unconditionally.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;

use crate::error::EccError;
use crate::limb::{self, Limbs, LIMBS};
use crate::oplog::{OpKind, OpLog};

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct FieldElement {
    limbs: Limbs,
    tag: u64,
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        limb::is_zero(&self.limbs)
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_slice(&self.limbs)
    }

    pub fn limbs(&self) -> &Limbs {
        &self.limbs
    }

    fn fold_digest(&self, state: u64) -> u64 {
        let mut h = state;
        for &w in &self.limbs {
            h ^= w as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
        h
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe({:x})", self.to_biguint())
    }
}

fn fnv(name: &str, limbs: &Limbs) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    for &w in limbs {
        h ^= w as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// A modulus context. All arithmetic below is performed mod this value.
#[derive(Clone)]
pub struct Modulus {
    name: String,
    limbs: Limbs,
    bits: u32,
    sig: usize,
    tag: u64,
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Modulus({}, {:x})", self.name, self.to_biguint())
    }
}

impl Modulus {
    pub fn new(name: impl Into<String>, value: &BigUint) -> Result<Self, EccError> {
        let name = name.into();
        let digits = value.to_u32_digits();
        if digits.is_empty() || digits.len() > LIMBS || *value < BigUint::from(3u8) {
            return Err(EccError::InvalidCurve(format!(
                "modulus {name} out of supported range"
            )));
        }
        let mut limbs = limb::ZERO;
        limbs[..digits.len()].copy_from_slice(&digits);
        let tag = fnv(&name, &limbs);
        Ok(Modulus {
            name,
            bits: limb::bits(&limbs),
            sig: digits.len(),
            limbs,
            tag,
        })
    }

    pub fn from_hex(name: impl Into<String>, hex: &str) -> Result<Self, EccError> {
        let v = BigUint::parse_bytes(hex.as_bytes(), 16)
            .ok_or_else(|| EccError::InvalidCurve("bad hex modulus".into()))?;
        Modulus::new(name, &v)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_slice(&self.limbs)
    }

    /// Canonical element from an arbitrary-precision value (reduced mod m).
    pub fn fe(&self, value: &BigUint) -> FieldElement {
        let reduced = value % self.to_biguint();
        let digits = reduced.to_u32_digits();
        let mut limbs = limb::ZERO;
        limbs[..digits.len()].copy_from_slice(&digits);
        FieldElement {
            limbs,
            tag: self.tag,
        }
    }

    pub fn fe_u64(&self, value: u64) -> FieldElement {
        self.fe(&BigUint::from(value))
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            limbs: limb::ZERO,
            tag: self.tag,
        }
    }

    pub fn one(&self) -> FieldElement {
        self.fe_u64(1)
    }

    #[inline]
    fn owns(&self, fe: &FieldElement) {
        assert!(
            fe.tag == self.tag,
            "modulus mismatch: element does not belong to {}",
            self.name
        );
    }

    fn wrap(&self, limbs: Limbs) -> FieldElement {
        FieldElement {
            limbs,
            tag: self.tag,
        }
    }

    fn digest(&self, a: &FieldElement, b: &FieldElement) -> u64 {
        b.fold_digest(a.fold_digest(0x9e37_79b9_7f4a_7c15))
    }

    /// Modular addition. Returns the sum and whether the reduction fired.
    pub fn add(&self, a: &FieldElement, b: &FieldElement, log: &mut OpLog) -> (FieldElement, bool) {
        self.owns(a);
        self.owns(b);
        let (sum, carry) = limb::add(&a.limbs, &b.limbs);
        let reduced = carry || limb::cmp(&sum, &self.limbs) != Ordering::Less;
        let out = if reduced {
            limb::sub(&sum, &self.limbs).0
        } else {
            sum
        };
        log.push(OpKind::Add, reduced, self.digest(a, b));
        (self.wrap(out), reduced)
    }

    /// Modular subtraction. Returns the difference and whether the borrow
    /// (and therefore the corrective addition of the modulus) fired.
    pub fn sub(&self, a: &FieldElement, b: &FieldElement, log: &mut OpLog) -> (FieldElement, bool) {
        self.owns(a);
        self.owns(b);
        let (diff, borrow) = limb::sub(&a.limbs, &b.limbs);
        let out = if borrow {
            limb::add(&diff, &self.limbs).0
        } else {
            diff
        };
        log.push(OpKind::Sub, borrow, self.digest(a, b));
        (self.wrap(out), borrow)
    }

    /// Modular multiplication; the reduction is unconditional.
    pub fn mul(&self, a: &FieldElement, b: &FieldElement, log: &mut OpLog) -> FieldElement {
        self.owns(a);
        self.owns(b);
        let wide = limb::mul_wide(&a.limbs, &b.limbs);
        let out = limb::rem_wide(&wide, &self.limbs, self.sig);
        log.push(OpKind::Mul, false, self.digest(a, b));
        self.wrap(out)
    }

    /// Modular squaring; logged as a multiplication.
    pub fn sqr(&self, a: &FieldElement, log: &mut OpLog) -> FieldElement {
        self.mul(a, a, log)
    }

    /// Modular inverse by Fermat's little theorem (the modulus must be prime).
    /// Every squaring and multiplication in the chain is logged.
    pub fn inv(&self, a: &FieldElement, log: &mut OpLog) -> Result<FieldElement, EccError> {
        self.owns(a);
        if a.is_zero() {
            return Err(EccError::InversionOfZero);
        }
        let (exp, _) = limb::sub(&self.limbs, &{
            let mut two = limb::ZERO;
            two[0] = 2;
            two
        });
        let nbits = limb::bits(&exp);
        let mut acc = *a;
        for i in (0..nbits - 1).rev() {
            acc = self.sqr(&acc, log);
            if limb::bit(&exp, i) {
                acc = self.mul(&acc, a, log);
            }
        }
        Ok(acc)
    }

    /// Exact halving: (a + m)/2 when odd, a/2 when even. Not a modular
    /// operation in the leakage model, so nothing is logged.
    pub fn half(&self, a: &FieldElement) -> FieldElement {
        self.owns(a);
        if a.limbs[0] & 1 == 1 {
            let (sum, carry) = limb::add(&a.limbs, &self.limbs);
            self.wrap(limb::shr1(&sum, carry))
        } else {
            self.wrap(limb::shr1(&a.limbs, false))
        }
    }

    // Unlogged twins for plumbing outside the instrumented region.

    pub fn add_raw(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.owns(a);
        self.owns(b);
        let (sum, carry) = limb::add(&a.limbs, &b.limbs);
        if carry || limb::cmp(&sum, &self.limbs) != Ordering::Less {
            self.wrap(limb::sub(&sum, &self.limbs).0)
        } else {
            self.wrap(sum)
        }
    }

    pub fn sub_raw(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.owns(a);
        self.owns(b);
        let (diff, borrow) = limb::sub(&a.limbs, &b.limbs);
        if borrow {
            self.wrap(limb::add(&diff, &self.limbs).0)
        } else {
            self.wrap(diff)
        }
    }

    pub fn mul_raw(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.owns(a);
        self.owns(b);
        let wide = limb::mul_wide(&a.limbs, &b.limbs);
        self.wrap(limb::rem_wide(&wide, &self.limbs, self.sig))
    }

    pub fn neg_raw(&self, a: &FieldElement) -> FieldElement {
        self.sub_raw(&self.zero(), a)
    }
}
