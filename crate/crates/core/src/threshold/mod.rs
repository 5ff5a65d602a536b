//! L-out-of-L threshold variant: additive key shares, a collective public key
//! over a common random `p1`, and collective decryption where every party
//! adds smudging noise to its partial decryption.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::{log2_rational, rational};
use crate::he::{
    bfv_round, ckks_scale_down, Ciphertext, Plaintext, PublicKey, Scheme, SchemeParams,
};
use crate::planner::bounds::{smudge_factor, to_rational};
use crate::ring::{
    crt_lift, sample_gaussian, sample_smudging_rns, sample_ternary, sample_uniform, BigCoeffs,
    RingElement,
};
use crate::rng::labelled_stream;

/// Common reference string: a seed and the uniform `p1` it expands to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crs {
    seed: [u8; 32],
    p1: RingElement,
}

impl Crs {
    pub fn seed(&self) -> &[u8; 32] {
        &self.seed
    }

    pub fn p1(&self) -> &RingElement {
        &self.p1
    }
}

/// Expands `seed` into `p1`; a pure function of `(seed, params)`.
pub fn crs_expand(seed: [u8; 32], params: &SchemeParams) -> Crs {
    let mut rng = labelled_stream("thag/crs/v1", &seed);
    let p1 = sample_uniform(params.ring(), &mut rng).to_ntt();
    Crs { seed, p1 }
}

/// Party `index`'s ternary share of the ideal secret key.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretShare {
    index: u16,
    sk: RingElement,
    sk_ntt: RingElement,
}

impl std::fmt::Debug for SecretShare {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecretShare").field("index", &self.index).finish_non_exhaustive()
    }
}

impl SecretShare {
    pub fn index(&self) -> u16 {
        self.index
    }

    pub fn element(&self) -> &RingElement {
        &self.sk
    }

    /// Share holding a given element (test hook).
    pub fn from_element(index: u16, sk: RingElement) -> Self {
        let sk = sk.to_coefficient();
        let sk_ntt = sk.to_ntt();
        Self { index, sk, sk_ntt }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkShare {
    pub index: u16,
    pub p0: RingElement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollectivePublicKey {
    pk: PublicKey,
}

impl CollectivePublicKey {
    pub fn public_key(&self) -> &PublicKey {
        &self.pk
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialDecryption {
    pub index: u16,
    pub h: RingElement,
}

/// Smudging bound `b_smg = 2^{⌈λ/2⌉}·b_ct` for a ciphertext whose noise is
/// at most `b_ct`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmudgeParams {
    pub lambda: u32,
    pub b_ct: BigRational,
    pub b_smg: BigRational,
}

impl SmudgeParams {
    /// No smudging at all (`b_smg = 0`).
    pub fn disabled(b_ct: BigRational) -> Self {
        Self {
            lambda: 0,
            b_ct,
            b_smg: BigRational::zero(),
        }
    }

    /// Smudging matching `params`: `b_ct` is the worst-case aggregate bound
    /// `L·B(2nL+1)`, disabled when the parameters carry no λ.
    pub fn for_params(params: &SchemeParams) -> Self {
        let b_ct = params.bounds().b_ct.clone();
        match params.lambda() {
            Some(lambda) => smudge_bound(lambda, b_ct),
            None => Self::disabled(b_ct),
        }
    }

    /// Largest integer the sampler may draw.
    pub fn sample_bound(&self) -> BigUint {
        self.b_smg.floor().to_integer().to_biguint().unwrap_or_default()
    }
}

pub fn smudge_bound(lambda: u32, b_ct: BigRational) -> SmudgeParams {
    let b_smg = to_rational(&smudge_factor(lambda)) * &b_ct;
    SmudgeParams { lambda, b_ct, b_smg }
}

pub fn gen_share<R: Rng + ?Sized>(params: &SchemeParams, index: u16, rng: &mut R) -> SecretShare {
    SecretShare::from_element(index, sample_ternary(params.ring(), rng))
}

/// `p0_i = −p1·sk_i + e_i` with `e_i ← χ`.
pub fn pk_share<R: Rng + ?Sized>(
    params: &SchemeParams,
    share: &SecretShare,
    crs: &Crs,
    rng: &mut R,
) -> Result<PkShare> {
    let e = sample_gaussian(params.ring(), params.noise(), rng);
    pk_share_with_error(share, crs, &e)
}

/// [`pk_share`] with an explicit error term (deterministic test hook).
pub fn pk_share_with_error(share: &SecretShare, crs: &Crs, e: &RingElement) -> Result<PkShare> {
    let mut p0 = share.sk_ntt.mul(&crs.p1)?;
    p0.intt_in_place();
    let p0 = e.sub(&p0)?;
    Ok(PkShare {
        index: share.index,
        p0,
    })
}

fn check_indices(expected: usize, indices: impl Iterator<Item = u16>) -> Result<()> {
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for i in indices {
        if i == 0 || i as usize > expected || !seen.insert(i) {
            return Err(Error::DuplicateIndex(i));
        }
        count += 1;
    }
    if count != expected {
        return Err(Error::MissingShare { expected, got: count });
    }
    Ok(())
}

/// `cpk = (Σ p0_i, p1)`; needs exactly one share from each of the L parties.
pub fn combine_pk(params: &SchemeParams, shares: &[PkShare], crs: &Crs) -> Result<CollectivePublicKey> {
    check_indices(params.parties(), shares.iter().map(|s| s.index))?;
    let mut p0 = RingElement::zero(params.ring());
    for s in shares {
        p0.add_assign(&s.p0)?;
    }
    Ok(CollectivePublicKey {
        pk: PublicKey::from_parts(&p0, &crs.p1)?,
    })
}

fn check_fits(params: &SchemeParams, smudge: &SmudgeParams) -> Result<()> {
    let needed = &smudge.b_ct + rational(params.parties() as u64) * &smudge.b_smg;
    let margin = params.noise_margin();
    if needed >= margin {
        return Err(Error::BoundTooLargeForQ(format!(
            "b_ct + L·b_smg ≈ 2^{:.1} but q leaves room for 2^{:.1}",
            log2_rational(&needed),
            log2_rational(&margin)
        )));
    }
    Ok(())
}

/// `h_i = sk_i·c1 + e_smg,i` with `e_smg,i` uniform on `[−b_smg, b_smg]`.
pub fn partial_decrypt<R: Rng + ?Sized>(
    params: &SchemeParams,
    share: &SecretShare,
    ct: &Ciphertext,
    smudge: &SmudgeParams,
    rng: &mut R,
) -> Result<PartialDecryption> {
    check_fits(params, smudge)?;
    let e = sample_smudging_rns(params.ring(), &smudge.sample_bound(), rng);
    partial_decrypt_with_noise(share, ct, &e)
}

/// [`partial_decrypt`] with explicit smudging noise (deterministic test hook).
pub fn partial_decrypt_with_noise(
    share: &SecretShare,
    ct: &Ciphertext,
    e_smg: &RingElement,
) -> Result<PartialDecryption> {
    let mut h = ct.c1().to_ntt().mul(&share.sk_ntt)?;
    h.intt_in_place();
    h.add_assign(e_smg)?;
    Ok(PartialDecryption {
        index: share.index,
        h,
    })
}

/// `d = [c0 + Σ h_i]_q`, still in RNS form.
pub fn combine_decrypt_rns(
    params: &SchemeParams,
    ct: &Ciphertext,
    partials: &[PartialDecryption],
) -> Result<RingElement> {
    check_indices(params.parties(), partials.iter().map(|p| p.index))?;
    let mut d = ct.c0().clone();
    for p in partials {
        d.add_assign(&p.h)?;
    }
    Ok(d)
}

/// `d = [c0 + Σ h_i]_q`, lifted to centered integers.
pub fn combine_decrypt(
    params: &SchemeParams,
    ct: &Ciphertext,
    partials: &[PartialDecryption],
) -> Result<BigCoeffs> {
    Ok(crt_lift(&combine_decrypt_rns(params, ct, partials)?))
}

/// `m = [⌊(t/q)·d⌉]_t`.
pub fn finalize_bfv(params: &SchemeParams, d: &BigCoeffs) -> Result<Plaintext> {
    if params.scheme() != Scheme::Bfv {
        return Err(Error::SchemeMismatch {
            expected: Scheme::Bfv.to_string(),
            got: params.scheme().to_string(),
        });
    }
    Ok(Plaintext::bfv(bfv_round(params, d)))
}

/// `d/Δ` as exact rationals; the residual is at most `opened_bound/Δ = ε`.
pub fn finalize_ckks(params: &SchemeParams, d: &BigCoeffs) -> Result<Plaintext> {
    if params.scheme() != Scheme::Ckks {
        return Err(Error::SchemeMismatch {
            expected: Scheme::Ckks.to_string(),
            got: params.scheme().to_string(),
        });
    }
    Ok(ckks_scale_down(params, d))
}

pub fn finalize(params: &SchemeParams, d: &BigCoeffs) -> Result<Plaintext> {
    match params.scheme() {
        Scheme::Bfv => finalize_bfv(params, d),
        Scheme::Ckks => finalize_ckks(params, d),
    }
}
