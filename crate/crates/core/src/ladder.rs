//! Montgomery ladder with (X, Y)-only co-Z addition, instrumented.
//!
//! The operation order inside each primitive is fixed and load-bearing: the
//! collision analysis downstream keys on absolute log indexes, so the order
//! must not change. The frozen kind sequences are pinned by tests.
//!
//! Register convention per ladder step for key bit b:
//!   (R_{1-b}, R_b)   <- XYCZ-ADDC(R_b, R_{1-b})   (sum, difference)
//!   (R_b,   R_{1-b}) <- XYCZ-ADD(R_{1-b}, R_b)    (sum, re-represented first)
//! maintaining R0 = mP, R1 = (m+1)P for the processed prefix m of the scalar.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use crate::curve::{AffinePoint, CoZPair, CurveParams};
use crate::error::EccError;
use crate::field::FieldElement;
use crate::oplog::{LadderVariant, OpKind, OpLog, Phase};

/// Scale a point in place by z: X *= z^2, Y *= z^3. Four multiplications.
pub fn apply_z(
    curve: &CurveParams,
    x: &mut FieldElement,
    y: &mut FieldElement,
    z: &FieldElement,
    log: &mut OpLog,
) {
    let m = &curve.p;
    let mut t = m.sqr(z, log);
    *x = m.mul(x, &t, log);
    t = m.mul(&t, z, log);
    *y = m.mul(y, &t, log);
}

/// Initial double: projects P through the random z, doubles it in place with
/// the a = -3 Jacobian formulas, and re-projects a copy of P into the
/// resulting Z frame. Returns ((X1,Y1) = 2P, (X2,Y2) = P) sharing one Z.
pub fn xycz_idbl(
    curve: &CurveParams,
    p: &AffinePoint,
    z: &FieldElement,
    log: &mut OpLog,
) -> Result<CoZPair, EccError> {
    xycz_idbl_inner(curve, p, z, log).map(|(pair, _)| pair)
}

/// As [`xycz_idbl`], additionally returning the result of the final
/// A - X3 subtraction (reused by the shared-subtraction countermeasure).
pub(crate) fn xycz_idbl_inner(
    curve: &CurveParams,
    p: &AffinePoint,
    z: &FieldElement,
    log: &mut OpLog,
) -> Result<(CoZPair, FieldElement), EccError> {
    if p.infinity {
        return Err(EccError::InfinityInput);
    }
    if !curve.is_on_curve(p) {
        return Err(EccError::PointNotOnCurve(curve.name.clone()));
    }
    if z.is_zero() {
        return Err(EccError::ZeroZ);
    }
    let m = &curve.p;

    let mut x1 = p.x;
    let mut y1 = p.y;
    apply_z(curve, &mut x1, &mut y1, z, log);

    // Jacobian doubling, a = -3 shortcut: B = 3/2 (x^2 - z^4).
    let mut t4 = m.sqr(&y1, log);
    let mut t5 = m.mul(&x1, &t4, log); // A = x * y^2
    t4 = m.sqr(&t4, log); // y^4
    y1 = m.mul(&y1, z, log); // z3 = y * z
    let mut zz = m.sqr(z, log); // z^2
    (x1, _) = m.add(&x1, &zz, log); // x + z^2
    (zz, _) = m.add(&zz, &zz, log); // 2 z^2
    (zz, _) = m.sub(&x1, &zz, log); // x - z^2
    x1 = m.mul(&x1, &zz, log); // x^2 - z^4
    (zz, _) = m.add(&x1, &x1, log);
    (x1, _) = m.add(&x1, &zz, log); // 3 (x^2 - z^4)
    x1 = m.half(&x1); // B (plain shift, not logged)
    zz = m.sqr(&x1, log); // B^2
    (zz, _) = m.sub(&zz, &t5, log);
    (zz, _) = m.sub(&zz, &t5, log); // X3 = B^2 - 2A
    (t5, _) = m.sub(&t5, &zz, log); // A - X3
    x1 = m.mul(&x1, &t5, log);
    (t4, _) = m.sub(&x1, &t4, log); // Y3

    // R0 = P in the Z3 frame.
    let mut x2 = p.x;
    let mut y2 = p.y;
    apply_z(curve, &mut x2, &mut y2, &y1, log);

    Ok((
        CoZPair {
            x1: zz,
            y1: t4,
            x2,
            y2,
        },
        t5,
    ))
}

/// Conjugate co-Z addition: from P = (X1,Y1) and Q = (X2,Y2) sharing a Z,
/// produces (P+Q, P-Q) sharing a new Z.
pub fn xycz_addc(
    curve: &CurveParams,
    p: (FieldElement, FieldElement),
    q: (FieldElement, FieldElement),
    log: &mut OpLog,
) -> Result<((FieldElement, FieldElement), (FieldElement, FieldElement)), EccError> {
    xycz_addc_inner(curve, p, q, None, log)
}

fn xycz_addc_inner(
    curve: &CurveParams,
    (x1, y1): (FieldElement, FieldElement),
    (x2, y2): (FieldElement, FieldElement),
    saved_diff: Option<FieldElement>,
    log: &mut OpLog,
) -> Result<((FieldElement, FieldElement), (FieldElement, FieldElement)), EccError> {
    if x1 == x2 {
        return Err(EccError::DegenerateInput);
    }
    let m = &curve.p;

    // The shared-subtraction countermeasure reuses the difference computed by
    // the previous XYCZ-ADD (its square is sign-insensitive).
    let t5 = match saved_diff {
        Some(v) => v,
        None => m.sub(&x2, &x1, log).0,
    };
    let a = m.sqr(&t5, log);
    let b = m.mul(&x1, &a, log);
    let c = m.mul(&x2, &a, log);
    let (ysum, _) = m.add(&y2, &y1, log);
    let (ydif, _) = m.sub(&y2, &y1, log);
    let (cb, _) = m.sub(&c, &b, log);
    let e = m.mul(&y1, &cb, log);
    let (bc, _) = m.add(&b, &c, log);
    let d = m.sqr(&ydif, log);
    let (x3, _) = m.sub(&d, &bc, log);
    let (bmx, _) = m.sub(&b, &x3, log);
    let t = m.mul(&ydif, &bmx, log);
    let (y3, _) = m.sub(&t, &e, log);
    let f = m.sqr(&ysum, log);
    let (bc2, _) = m.add(&b, &c, log);
    let (x3p, _) = m.sub(&f, &bc2, log);
    let (xpb, _) = m.sub(&x3p, &b, log);
    let t2 = m.mul(&ysum, &xpb, log);
    let (y3p, _) = m.sub(&t2, &e, log);

    Ok(((x3, y3), (x3p, y3p)))
}

/// Co-Z addition: from P = (X1,Y1) and Q = (X2,Y2) sharing a Z, produces
/// (P+Q, P') where P' is P re-represented in the new Z frame (X1' = B,
/// Y1' = E, both already computed along the way).
pub fn xycz_add(
    curve: &CurveParams,
    p: (FieldElement, FieldElement),
    q: (FieldElement, FieldElement),
    log: &mut OpLog,
) -> Result<((FieldElement, FieldElement), (FieldElement, FieldElement)), EccError> {
    xycz_add_inner(curve, p, q, log).map(|(sum, upd, _)| (sum, upd))
}

#[allow(clippy::type_complexity)]
fn xycz_add_inner(
    curve: &CurveParams,
    (x1, y1): (FieldElement, FieldElement),
    (x2, y2): (FieldElement, FieldElement),
    log: &mut OpLog,
) -> Result<
    (
        (FieldElement, FieldElement),
        (FieldElement, FieldElement),
        FieldElement,
    ),
    EccError,
> {
    if x1 == x2 {
        return Err(EccError::DegenerateInput);
    }
    let m = &curve.p;

    let t5 = m.sub(&x2, &x1, log).0;
    let a = m.sqr(&t5, log);
    let b = m.mul(&x1, &a, log);
    let c = m.mul(&x2, &a, log);
    let (ydif, _) = m.sub(&y2, &y1, log);
    let d = m.sqr(&ydif, log);
    let (t, _) = m.sub(&d, &b, log);
    let (x3, _) = m.sub(&t, &c, log);
    let (cb, _) = m.sub(&c, &b, log);
    let e = m.mul(&y1, &cb, log);
    let (bmx, _) = m.sub(&b, &x3, log); // B - X3: feeds the next ADDC's collision
    let t2 = m.mul(&ydif, &bmx, log);
    let (y3, _) = m.sub(&t2, &e, log);

    Ok(((x3, y3), (b, e), bmx))
}

/// Recovers lambda = 1/Z for the frame the final XYCZ-ADD will produce, from
/// the ladder registers after the final XYCZ-ADDC and the affine input point.
pub fn final_inv_z(
    curve: &CurveParams,
    r0: (FieldElement, FieldElement),
    r1: (FieldElement, FieldElement),
    p: &AffinePoint,
    b: bool,
    log: &mut OpLog,
) -> Result<FieldElement, EccError> {
    let m = &curve.p;
    let (yb, xb) = if b { (r1.1, r1.0) } else { (r0.1, r0.0) };
    let mut z = m.sub(&r1.0, &r0.0, log).0;
    z = m.mul(&z, &yb, log);
    z = m.mul(&z, &p.x, log);
    z = m.inv(&z, log)?;
    z = m.mul(&z, &p.y, log);
    z = m.mul(&z, &xb, log);
    Ok(z)
}

fn random_nonzero_fe<R: Rng + ?Sized>(curve: &CurveParams, rng: &mut R) -> FieldElement {
    let p = curve.p.to_biguint();
    loop {
        let v = rng.gen_biguint_below(&p);
        if !v.is_zero() {
            return curve.p.fe(&v);
        }
    }
}

/// Scalar multiplication k * P by the instrumented co-Z Montgomery ladder.
///
/// Requires 2 <= k < q. Coordinate randomization is always on: the initial
/// double projects P through a fresh random z. The returned log holds every
/// modular operation of the execution.
pub fn scalar_mul<R: Rng + ?Sized>(
    curve: &CurveParams,
    k: &BigUint,
    p: &AffinePoint,
    variant: LadderVariant,
    rng: &mut R,
) -> Result<(AffinePoint, OpLog), EccError> {
    if *k < BigUint::from(2u8) || *k >= curve.order {
        return Err(EccError::ScalarOutOfRange);
    }
    if p.infinity || !curve.is_on_curve(p) {
        return Err(EccError::PointNotOnCurve(curve.name.clone()));
    }

    let n = k.bits();
    let mut log = OpLog::new(curve.name.clone(), variant);
    log.scalar_bits = n as u32;
    log.set_phase(Phase::InitialDouble);

    let z = random_nonzero_fe(curve, rng);
    let (pair, idbl_diff) = xycz_idbl_inner(curve, p, &z, &mut log)?;
    // rx[i], ry[i] hold register R_i.
    let mut rx = [pair.x2, pair.x1];
    let mut ry = [pair.y2, pair.y1];
    let mut saved = idbl_diff;

    let shared = variant == LadderVariant::SharedSubtraction;

    for i in (1..=n.saturating_sub(2)).rev() {
        let b = k.bit(i) as usize;
        log.set_phase(Phase::LadderIter(i as u32));
        if variant == LadderVariant::ReRandomize {
            let z2 = random_nonzero_fe(curve, rng);
            let (mut x, mut y) = (rx[0], ry[0]);
            apply_z(curve, &mut x, &mut y, &z2, &mut log);
            (rx[0], ry[0]) = (x, y);
            let (mut x, mut y) = (rx[1], ry[1]);
            apply_z(curve, &mut x, &mut y, &z2, &mut log);
            (rx[1], ry[1]) = (x, y);
        }
        let sv = shared.then_some(saved);
        let ((sx, sy), (dx, dy)) =
            xycz_addc_inner(curve, (rx[b], ry[b]), (rx[1 - b], ry[1 - b]), sv, &mut log)?;
        rx[1 - b] = sx;
        ry[1 - b] = sy;
        rx[b] = dx;
        ry[b] = dy;

        let ((ax, ay), (ux, uy), bmx) =
            xycz_add_inner(curve, (rx[1 - b], ry[1 - b]), (rx[b], ry[b]), &mut log)?;
        rx[b] = ax;
        ry[b] = ay;
        rx[1 - b] = ux;
        ry[1 - b] = uy;
        saved = bmx;
    }

    // Final block for bit 0.
    let b = k.bit(0) as usize;
    if rx[b] == rx[1 - b] {
        // The conjugate sum would be the point at infinity, which only
        // happens for k = q - 1; the result is then -P.
        debug_assert_eq!(*k, &curve.order - BigUint::one());
        return Ok((p.negate(curve), log));
    }
    log.set_phase(Phase::LadderIter(0));
    let sv = shared.then_some(saved);
    let ((sx, sy), (dx, dy)) =
        xycz_addc_inner(curve, (rx[b], ry[b]), (rx[1 - b], ry[1 - b]), sv, &mut log)?;
    rx[1 - b] = sx;
    ry[1 - b] = sy;
    rx[b] = dx;
    ry[b] = dy;

    log.set_phase(Phase::Final);
    let lambda = final_inv_z(curve, (rx[0], ry[0]), (rx[1], ry[1]), p, b == 1, &mut log)?;

    let ((ax, ay), (ux, uy), _) =
        xycz_add_inner(curve, (rx[1 - b], ry[1 - b]), (rx[b], ry[b]), &mut log)?;
    rx[b] = ax;
    ry[b] = ay;
    rx[1 - b] = ux;
    ry[1 - b] = uy;

    let (mut x0, mut y0) = (rx[0], ry[0]);
    apply_z(curve, &mut x0, &mut y0, &lambda, &mut log);
    Ok((AffinePoint::new(x0, y0), log))
}

/// The kind sequence of a ladder execution for a given scalar bit length.
/// Values never influence the sequence, only reduced flags, so any scalar of
/// the right length yields the canonical sequence.
pub fn canonical_kind_sequence(
    curve: &CurveParams,
    variant: LadderVariant,
    n_bits: u32,
) -> Vec<OpKind> {
    canonical_log(curve, variant, n_bits).kinds()
}

fn canonical_log(curve: &CurveParams, variant: LadderVariant, n_bits: u32) -> OpLog {
    use rand::SeedableRng;
    assert!(n_bits >= 2);
    let k = (BigUint::one() << (n_bits - 1)) + BigUint::one();
    assert!(k < curve.order, "no scalar of {n_bits} bits fits the order");
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x5eed);
    let (_, log) = scalar_mul(curve, &k, &curve.g, variant, &mut rng)
        .expect("canonical ladder execution cannot fail");
    log
}

/// Positional layout of a ladder log: where the initial double ends and how
/// many operations each loop iteration contributes. Derived by running a
/// canonical execution rather than hardcoded, so it tracks the actual
/// instruction streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderLayout {
    pub idbl_ops: usize,
    pub iter_ops: usize,
    pub n_bits: u32,
}

impl LadderLayout {
    /// Log index of the first operation of loop iteration `j` (0-based from
    /// the top of the scalar).
    pub fn iter_start(&self, j: usize) -> usize {
        self.idbl_ops + j * self.iter_ops
    }
}

pub fn ladder_layout(curve: &CurveParams, variant: LadderVariant, n_bits: u32) -> LadderLayout {
    let log = canonical_log(curve, variant, n_bits);
    let idbl_ops = log
        .events()
        .iter()
        .take_while(|e| e.phase == Phase::InitialDouble)
        .count();
    let mut per_iter = std::collections::BTreeMap::<u32, usize>::new();
    for e in log.events() {
        if let Phase::LadderIter(i) = e.phase {
            if i >= 1 {
                *per_iter.entry(i).or_default() += 1;
            }
        }
    }
    let mut counts: Vec<usize> = per_iter.values().copied().collect();
    counts.dedup();
    assert_eq!(counts.len(), 1, "loop iterations must have uniform length");
    LadderLayout {
        idbl_ops,
        iter_ops: counts[0],
        n_bits,
    }
}
