//! Single-key additive BFV and CKKS with coefficient-wise encoding (no slot
//! packing). Encryption randomness is ternary in both schemes.

mod encoding;
mod keys;
mod ops;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ceil_log2, log2_rational, rational};
use crate::planner::bounds::{mp_bounds, scale_from_eps, to_rational, MpBounds};
use crate::ring::modulus::select_primes;
use crate::ring::{NoiseSpec, RingParams};

pub use encoding::{decode_fixed, decode_fixed_exact, encode_fixed, Plaintext};
pub use keys::{pubkeygen, pubkeygen_with_error, seckeygen, PublicKey, SecretKey};
pub use ops::{
    add, dec_bfv, dec_ckks, decrypt, decrypt_raw, encrypt, encrypt_with, Ciphertext,
    EncryptionRandomness,
};
pub(crate) use ops::{bfv_round, ckks_scale_down};
#[cfg(feature = "noise-probe")]
pub(crate) use ops::encode_scaled;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Bfv,
    Ckks,
}

impl Scheme {
    pub fn tag(self) -> u8 {
        match self {
            Scheme::Bfv => 1,
            Scheme::Ckks => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(Scheme::Bfv),
            2 => Ok(Scheme::Ckks),
            _ => Err(Error::Decode(format!("unknown scheme tag {tag}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bfv => "bfv",
            Scheme::Ckks => "ckks",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Bfv => "BFV",
            Scheme::Ckks => "CKKS",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bfv" | "mbfv" => Ok(Scheme::Bfv),
            "ckks" | "mckks" => Ok(Scheme::Ckks),
            _ => Err(Error::Config(format!("unknown scheme {s:?} (expected bfv or ckks)"))),
        }
    }
}

/// How the ciphertext modulus is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModulusChoice {
    /// Explicit RNS primes.
    Primes(Vec<u64>),
    /// Target bit length; primes are picked by [`select_primes`].
    Bits(u32),
}

/// Raw, unvalidated scheme configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub n: usize,
    pub modulus: ModulusChoice,
    /// BFV plaintext modulus t.
    pub plaintext_modulus: Option<BigUint>,
    /// CKKS target inverse error margin.
    pub eps_inv: Option<BigUint>,
    /// CKKS scale override; derived from `eps_inv` when absent.
    pub delta: Option<BigUint>,
    pub noise: NoiseSpec,
    /// Number of parties L whose fresh ciphertexts get summed.
    pub parties: usize,
    /// Smudging bits for collective decryption; `None` for single-key use.
    pub lambda: Option<u32>,
    /// Bound on the magnitude of the (aggregated) CKKS message.
    pub b_m: BigRational,
}

impl SchemeConfig {
    pub fn bfv(n: usize, modulus: ModulusChoice, t: impl Into<BigUint>, noise: NoiseSpec) -> Self {
        Self {
            scheme: Scheme::Bfv,
            n,
            modulus,
            plaintext_modulus: Some(t.into()),
            eps_inv: None,
            delta: None,
            noise,
            parties: 1,
            lambda: None,
            b_m: BigRational::one(),
        }
    }

    pub fn ckks(n: usize, modulus: ModulusChoice, eps_inv: impl Into<BigUint>, noise: NoiseSpec) -> Self {
        Self {
            scheme: Scheme::Ckks,
            n,
            modulus,
            plaintext_modulus: None,
            eps_inv: Some(eps_inv.into()),
            delta: None,
            noise,
            parties: 1,
            lambda: None,
            b_m: BigRational::one(),
        }
    }

    pub fn with_parties(mut self, parties: usize, lambda: Option<u32>) -> Self {
        self.parties = parties;
        self.lambda = lambda;
        self
    }

    pub fn with_delta(mut self, delta: BigUint) -> Self {
        self.delta = Some(delta);
        self
    }
}

/// Validated parameters. Immutable and shared behind an `Arc`.
#[derive(Debug, Clone)]
pub struct SchemeParams {
    scheme: Scheme,
    ring: Arc<RingParams>,
    t: Option<BigUint>,
    delta: BigUint,
    delta_residues: Vec<u64>,
    eps_inv: Option<BigUint>,
    noise: NoiseSpec,
    parties: usize,
    lambda: Option<u32>,
    b_m: BigRational,
    bounds: MpBounds,
    kappa: u64,
}

impl PartialEq for SchemeParams {
    fn eq(&self, other: &Self) -> bool {
        self.scheme == other.scheme
            && self.ring == other.ring
            && self.t == other.t
            && self.delta == other.delta
            && self.parties == other.parties
            && self.lambda == other.lambda
            && self.noise == other.noise
            && self.b_m == other.b_m
    }
}

fn deficit_bits(lhs: &BigRational, rhs: &BigRational) -> f64 {
    if rhs.is_positive() {
        log2_rational(lhs) - log2_rational(rhs)
    } else {
        f64::INFINITY
    }
}

/// Validates a configuration, picks RNS primes and derives Δ and the
/// addition capacity κ.
pub fn setup(config: &SchemeConfig) -> Result<Arc<SchemeParams>> {
    if config.parties == 0 {
        return Err(Error::InvalidParams("at least one party is required".into()));
    }
    if !config.b_m.is_positive() {
        return Err(Error::InvalidParams("b_m must be positive".into()));
    }
    let primes = match &config.modulus {
        ModulusChoice::Primes(p) => p.clone(),
        ModulusChoice::Bits(bits) => select_primes(config.n, *bits)?,
    };
    let ring = RingParams::new(config.n, &primes)?;
    let q = to_rational(ring.q());
    let l = config.parties;
    let bounds = mp_bounds(config.n, l, config.noise.bound(), config.lambda.unwrap_or(0));
    let smudge_total = match config.lambda {
        Some(_) => rational(l as u64) * &bounds.b_smg,
        None => BigRational::zero(),
    };
    let b_fresh_mp = bounds.b_fresh_mp.clone();
    // worst-case noise after summing all L fresh ciphertexts and opening
    let opened = rational(l as u64) * &b_fresh_mp + &smudge_total;

    let (t, delta, margin, fresh_label, mp_label) = match config.scheme {
        Scheme::Bfv => {
            let t = config
                .plaintext_modulus
                .clone()
                .ok_or_else(|| Error::InvalidParams("BFV needs a plaintext modulus t".into()))?;
            if t < BigUint::from(2u32) {
                return Err(Error::InvalidParams("t must be at least 2".into()));
            }
            if &t >= ring.q() {
                return Err(Error::InvalidParams(format!(
                    "q ({} bits) must exceed t ({} bits)",
                    ring.log2_q(),
                    t.bits()
                )));
            }
            let delta = ring.q() / &t;
            let margin = crate::planner::bounds::bfv_margin(ring.q(), &t);
            (Some(t), delta, margin, "(2n+1)B < q/(2t) - t/2", "B_ct^MP < q/(2t) - t/2")
        }
        Scheme::Ckks => {
            let delta = match (&config.delta, &config.eps_inv) {
                (Some(d), _) => d.clone(),
                (None, Some(e)) => {
                    if e.is_zero() {
                        return Err(Error::InvalidParams("eps_inv must be positive".into()));
                    }
                    scale_from_eps(e, &opened)
                }
                (None, None) => {
                    return Err(Error::InvalidParams("CKKS needs eps_inv or an explicit delta".into()))
                }
            };
            if delta.is_zero() {
                return Err(Error::InvalidParams("delta must be at least 1".into()));
            }
            let margin = &q / rational(2) - to_rational(&delta) * &config.b_m;
            (None, delta, margin, "Delta*B_m + (2n+1)B < q/2", "Delta*B_m + B_ct^MP < q/2")
        }
    };

    // Fresh single-key decryptability.
    let fresh = crate::planner::bounds::fresh_bound(config.n, config.noise.bound());
    if fresh >= margin {
        return Err(Error::BoundViolation {
            inequality: fresh_label.into(),
            deficit_bits: deficit_bits(&fresh, &margin),
        });
    }
    // noise(k) = (k+1)·B(2nL+1) + L·b_smg must stay below the margin
    let budget = &margin - &smudge_total;
    let kappa = if b_fresh_mp.is_zero() {
        u64::MAX
    } else if budget <= b_fresh_mp {
        0
    } else {
        let ratio = (&budget / &b_fresh_mp).ceil().to_integer();
        let k: BigInt = ratio - 2;
        k.to_u64().unwrap_or(u64::MAX)
    };
    let needs_mp = l > 1 || config.lambda.is_some();
    if needs_mp && (budget <= b_fresh_mp || kappa < (l - 1) as u64) {
        return Err(Error::BoundViolation {
            inequality: mp_label.into(),
            deficit_bits: deficit_bits(&opened, &margin),
        });
    }
    let delta_residues = ring.residues_of(&delta);
    Ok(Arc::new(SchemeParams {
        scheme: config.scheme,
        ring,
        t,
        delta,
        delta_residues,
        eps_inv: config.eps_inv.clone(),
        noise: config.noise.clone(),
        parties: l,
        lambda: config.lambda,
        b_m: config.b_m.clone(),
        bounds,
        kappa,
    }))
}

impl SchemeParams {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn ring(&self) -> &Arc<RingParams> {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.ring.n()
    }

    pub fn q(&self) -> &BigUint {
        self.ring.q()
    }

    /// BFV plaintext modulus.
    pub fn t(&self) -> Option<&BigUint> {
        self.t.as_ref()
    }

    /// `⌊q/t⌋` for BFV, the encoding scale for CKKS.
    pub fn delta(&self) -> &BigUint {
        &self.delta
    }

    pub(crate) fn delta_residues(&self) -> &[u64] {
        &self.delta_residues
    }

    pub fn eps_inv(&self) -> Option<&BigUint> {
        self.eps_inv.as_ref()
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn lambda(&self) -> Option<u32> {
        self.lambda
    }

    pub fn b_m(&self) -> &BigRational {
        &self.b_m
    }

    pub fn bounds(&self) -> &MpBounds {
        &self.bounds
    }

    /// Number of homomorphic additions the modulus supports.
    pub fn kappa(&self) -> u64 {
        self.kappa
    }

    /// Worst-case noise of an opened aggregate of L fresh ciphertexts:
    /// `b_ct + L·b_smg` with smudging, `b_ct` without.
    pub fn opened_bound(&self) -> BigRational {
        match self.lambda {
            Some(_) => self.bounds.b_ct_mp.clone(),
            None => self.bounds.b_ct.clone(),
        }
    }

    /// Realized CKKS error margin `opened_bound / Δ`.
    pub fn epsilon(&self) -> Option<BigRational> {
        match self.scheme {
            Scheme::Ckks => Some(self.opened_bound() / to_rational(&self.delta)),
            Scheme::Bfv => None,
        }
    }

    /// `log2 Δ` rounded up (exact for power-of-two scales).
    pub fn delta_bits(&self) -> u64 {
        ceil_log2(&to_rational(&self.delta))
    }

    /// Noise the decryption rule tolerates: `q/(2t) − t/2` for BFV,
    /// `q/2 − Δ·B_m` for CKKS.
    pub fn noise_margin(&self) -> BigRational {
        let q = to_rational(self.ring.q());
        match &self.t {
            Some(t) => crate::planner::bounds::bfv_margin(self.ring.q(), t),
            None => q / rational(2) - to_rational(&self.delta) * &self.b_m,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_decimal;

    fn spec() -> NoiseSpec {
        NoiseSpec::with_default_bound(3.2).unwrap()
    }

    #[test]
    fn fresh_bound_accepts_small_t() {
        let p = setup(&SchemeConfig::bfv(1024, ModulusChoice::Bits(30), 257u32, spec())).unwrap();
        assert_eq!(p.ring().log2_q(), 30);
        assert_eq!(p.delta(), &(p.q() / 257u32));
        // margin ≈ 2^30/514 − 128.5 ≈ 2.09e6
        let margin = p.noise_margin().to_integer();
        assert!(margin > BigInt::from(2_000_000) && margin < BigInt::from(2_100_000));
        assert!(p.kappa() > 50);
    }

    #[test]
    fn fresh_bound_rejects_large_t() {
        let err = setup(&SchemeConfig::bfv(1024, ModulusChoice::Bits(30), 1u32 << 20, spec())).unwrap_err();
        match err {
            Error::BoundViolation { inequality, deficit_bits } => {
                assert!(inequality.contains("q/(2t)"));
                assert!(deficit_bits.is_infinite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ckks_eps_one_uses_power_of_two_noise_bound() {
        let cfg = SchemeConfig::ckks(1024, ModulusChoice::Bits(60), 1u32, spec());
        let p = setup(&cfg).unwrap();
        let b = p.opened_bound();
        let d = to_rational(p.delta());
        assert!(d >= b && d < rational(2) * &b);
        assert!(p.epsilon().unwrap() <= rational(1));
    }

    #[test]
    fn multiparty_capacity_is_checked() {
        // L = 2, λ = 16: B_ct^MP = (1 + 2·2^8)·2·19.2·4097 ≈ 8.07e7, so q must
        // exceed 2·257·8.07e7 + 257² ≈ 2^35.3
        let cfg = SchemeConfig::bfv(1024, ModulusChoice::Bits(34), 257u32, spec()).with_parties(2, Some(16));
        assert!(matches!(setup(&cfg), Err(Error::BoundViolation { .. })));
        let cfg = SchemeConfig::bfv(1024, ModulusChoice::Bits(37), 257u32, spec()).with_parties(2, Some(16));
        let p = setup(&cfg).unwrap();
        assert!(p.kappa() >= 1);
        assert_eq!(p.opened_bound(), parse_decimal("80707622.4").unwrap());
    }

    #[test]
    fn scheme_tags_round_trip() {
        for s in [Scheme::Bfv, Scheme::Ckks] {
            assert_eq!(Scheme::from_tag(s.tag()).unwrap(), s);
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!(Scheme::from_tag(9).is_err());
    }
}
