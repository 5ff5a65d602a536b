//! Secret-key-gated noise measurement. Compiled only with the `noise-probe`
//! feature; nothing in the protocol path depends on it.

use num_bigint::{BigInt, BigUint};

use crate::error::{Error, Result};
use crate::he::{decrypt_raw, encode_scaled, Ciphertext, Plaintext, SchemeParams, SecretKey};
use crate::ring::{crt_lift, inf_norm, BigCoeffs, RingElement};
use crate::threshold::SecretShare;

/// `‖[c0 + c1·s − Δ·m]_q‖∞` for the reference plaintext `pt`.
pub fn noise_of(params: &SchemeParams, sk: &SecretKey, ct: &Ciphertext, pt: &Plaintext) -> Result<BigUint> {
    let scaled = encode_scaled(params, pt)?;
    noise_of_scaled(sk, ct, &scaled)
}

/// Noise against an explicit `Δ·m` (for sums whose messages leave the
/// plaintext range before reduction).
pub fn noise_of_scaled(sk: &SecretKey, ct: &Ciphertext, scaled: &RingElement) -> Result<BigUint> {
    let v = decrypt_raw(sk, ct)?.sub(scaled)?;
    Ok(inf_norm(&crt_lift(&v)))
}

/// `Δ·m` for integer messages `m` taken as-is (no range check).
pub fn scaled_message(params: &SchemeParams, m: &[BigInt]) -> Result<RingElement> {
    let mut padded = m.to_vec();
    padded.resize(params.n(), BigInt::from(0));
    Ok(RingElement::from_bigints(params.ring(), &padded)?.mul_scalar_residues(params.delta_residues()))
}

/// Lifted `[c0 + c1·s]_q` under an explicit key.
pub fn raw_phase(sk: &SecretKey, ct: &Ciphertext) -> Result<BigCoeffs> {
    Ok(crt_lift(&decrypt_raw(sk, ct)?))
}

/// The ideal key `Σ sk_i` that no party holds; for tests only.
pub fn ideal_secret_key(shares: &[SecretShare]) -> Result<SecretKey> {
    let first = shares.first().ok_or(Error::MissingShare { expected: 1, got: 0 })?;
    let mut s = first.element().clone();
    for sh in &shares[1..] {
        s.add_assign(sh.element())?;
    }
    Ok(SecretKey::from_element(s))
}

/// A secret key wrapping an arbitrary element (planted-key tests).
pub fn secret_key_from(s: RingElement) -> SecretKey {
    SecretKey::from_element(s)
}
