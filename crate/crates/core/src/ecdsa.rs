//! ECDSA over the instrumented ladder.
//!
//! Signing runs kG through [`crate::ladder::scalar_mul`] and therefore yields
//! an operation log per signature. Verification and key generation use the
//! independent affine reference path; they are not instrumented.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use crate::curve::{AffinePoint, CurveParams};
use crate::error::EccError;
use crate::ladder;
use crate::oplog::{LadderVariant, OpLog};
use crate::reference;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureRecord {
    pub r: BigUint,
    pub s: BigUint,
    /// Message digest as an integer mod q.
    pub h: BigUint,
    /// Ground-truth nonce, retained only in simulation corpora.
    pub truth: Option<BigUint>,
}

/// Private scalar uniform in [1, q-1] and the matching public key.
pub fn keygen<R: Rng + ?Sized>(curve: &CurveParams, rng: &mut R) -> (BigUint, AffinePoint) {
    let d = rng.gen_biguint_range(&BigUint::one(), &curve.order);
    let q = reference::scalar_mul(curve, &d, &reference::from_affine(&curve.g));
    (d, reference::to_affine(curve, &q))
}

/// Ephemeral scalar uniform in [2^(n-1), q) where n = curve.nonce_bits, so
/// the ladder processes the same number of bits for every signature.
pub fn sample_nonce<R: Rng + ?Sized>(curve: &CurveParams, rng: &mut R) -> BigUint {
    let lo = BigUint::one() << (curve.nonce_bits - 1);
    debug_assert!(lo < curve.order);
    rng.gen_biguint_range(&lo, &curve.order)
}

/// Deterministic signing with a caller-chosen nonce. Fails with
/// [`EccError::NonceExhausted`] if r or s comes out zero (resample then).
/// The rng only feeds the ladder's coordinate randomization.
pub fn sign_with_nonce<R: Rng + ?Sized>(
    curve: &CurveParams,
    d: &BigUint,
    h: &BigUint,
    k: &BigUint,
    variant: LadderVariant,
    rng: &mut R,
) -> Result<(SignatureRecord, OpLog), EccError> {
    let q = &curve.order;
    let (point, log) = ladder::scalar_mul(curve, k, &curve.g, variant, rng)?;
    let r = point.x.to_biguint() % q;
    if r.is_zero() {
        return Err(EccError::NonceExhausted);
    }
    let k_inv = reference::modinv(k, q).ok_or(EccError::InversionOfZero)?;
    let s = (&k_inv * (h % q + &r * d % q)) % q;
    if s.is_zero() {
        return Err(EccError::NonceExhausted);
    }
    Ok((
        SignatureRecord {
            r,
            s,
            h: h % q,
            truth: Some(k.clone()),
        },
        log,
    ))
}

/// Signing with a freshly sampled nonce, resampling on the negligible r = 0
/// or s = 0 cases.
pub fn sign<R: Rng + ?Sized>(
    curve: &CurveParams,
    d: &BigUint,
    h: &BigUint,
    variant: LadderVariant,
    rng: &mut R,
) -> Result<(SignatureRecord, OpLog), EccError> {
    for _ in 0..128 {
        let k = sample_nonce(curve, rng);
        match sign_with_nonce(curve, d, h, &k, variant, rng) {
            Ok(out) => return Ok(out),
            Err(EccError::NonceExhausted) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(EccError::NonceExhausted)
}

/// Standard verification through the reference group law. Malformed
/// signatures return false rather than an error.
pub fn verify(
    curve: &CurveParams,
    public: &AffinePoint,
    h: &BigUint,
    r: &BigUint,
    s: &BigUint,
) -> bool {
    let q = &curve.order;
    if r.is_zero() || s.is_zero() || r >= q || s >= q {
        return false;
    }
    if public.infinity || !curve.is_on_curve(public) {
        return false;
    }
    let w = match reference::modinv(s, q) {
        Some(w) => w,
        None => return false,
    };
    let u1 = h % q * &w % q;
    let u2 = r * &w % q;
    let g = reference::from_affine(&curve.g);
    let pk = reference::from_affine(public);
    let lhs = reference::add(
        curve,
        &reference::scalar_mul(curve, &u1, &g),
        &reference::scalar_mul(curve, &u2, &pk),
    );
    match lhs {
        None => false,
        Some((x, _)) => x % q == *r,
    }
}
