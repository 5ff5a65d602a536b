use rand::Rng;

use super::SchemeParams;
use crate::error::{Error, Result};
use crate::ring::{sample_gaussian, sample_ternary, sample_uniform, RingElement};

/// Ternary secret `s`. Keeps an NTT copy for decryption.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    s: RingElement,
    s_ntt: RingElement,
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

impl SecretKey {
    pub(crate) fn from_element(s: RingElement) -> Self {
        let s = s.to_coefficient();
        let s_ntt = s.to_ntt();
        Self { s, s_ntt }
    }

    pub fn element(&self) -> &RingElement {
        &self.s
    }

    pub(crate) fn ntt(&self) -> &RingElement {
        &self.s_ntt
    }
}

/// `pk = (p0, p1) = (−s·p1 + e, p1)`, kept in NTT form for encryption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    p0_ntt: RingElement,
    p1_ntt: RingElement,
}

impl PublicKey {
    pub fn from_parts(p0: &RingElement, p1: &RingElement) -> Result<Self> {
        if p0.params() != p1.params() {
            return Err(Error::ParamsMismatch);
        }
        Ok(Self {
            p0_ntt: p0.to_ntt(),
            p1_ntt: p1.to_ntt(),
        })
    }

    pub fn p0(&self) -> RingElement {
        self.p0_ntt.to_coefficient()
    }

    pub fn p1(&self) -> RingElement {
        self.p1_ntt.to_coefficient()
    }

    pub(crate) fn ntt_parts(&self) -> (&RingElement, &RingElement) {
        (&self.p0_ntt, &self.p1_ntt)
    }
}

pub fn seckeygen<R: Rng + ?Sized>(params: &SchemeParams, rng: &mut R) -> SecretKey {
    SecretKey::from_element(sample_ternary(params.ring(), rng))
}

pub fn pubkeygen<R: Rng + ?Sized>(params: &SchemeParams, sk: &SecretKey, rng: &mut R) -> PublicKey {
    let p1 = sample_uniform(params.ring(), rng);
    let e = sample_gaussian(params.ring(), params.noise(), rng);
    pubkeygen_with_error(sk, &p1, &e).expect("elements share the key's ring")
}

/// Public key from a given `p1` and error `e` (deterministic test hook).
pub fn pubkeygen_with_error(sk: &SecretKey, p1: &RingElement, e: &RingElement) -> Result<PublicKey> {
    let p1_ntt = p1.to_ntt();
    let mut p0 = sk.ntt().mul(&p1_ntt)?.neg();
    p0.add_assign(&e.to_ntt())?;
    Ok(PublicKey { p0_ntt: p0, p1_ntt })
}
