use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

use super::{Plaintext, PublicKey, Scheme, SchemeParams, SecretKey};
use crate::error::{Error, Result};
use crate::planner::bounds::to_rational;
use crate::ring::{crt_lift, sample_gaussian, sample_ternary, BigCoeffs, RingElement};

/// `(c0, c1)` in coefficient form, tagged with its scheme and the number of
/// homomorphic additions it has absorbed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    c0: RingElement,
    c1: RingElement,
    scheme: Scheme,
    adds: u32,
}

impl Ciphertext {
    pub fn from_parts(c0: RingElement, c1: RingElement, scheme: Scheme, adds: u32) -> Result<Self> {
        if c0.params() != c1.params() {
            return Err(Error::ParamsMismatch);
        }
        Ok(Self {
            c0: c0.to_coefficient(),
            c1: c1.to_coefficient(),
            scheme,
            adds,
        })
    }

    pub fn c0(&self) -> &RingElement {
        &self.c0
    }

    pub fn c1(&self) -> &RingElement {
        &self.c1
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn adds_consumed(&self) -> u32 {
        self.adds
    }

    /// In-place homomorphic addition (same contract as [`add`]).
    pub fn add_assign(&mut self, params: &SchemeParams, other: &Ciphertext) -> Result<()> {
        let needed = check_add(params, self, other)?;
        self.c0.add_assign(&other.c0)?;
        self.c1.add_assign(&other.c1)?;
        self.adds = needed;
        Ok(())
    }
}

/// Encryption randomness `(u, e0, e1)`: ternary `u`, Gaussian errors.
#[derive(Debug, Clone)]
pub struct EncryptionRandomness {
    pub u: RingElement,
    pub e0: RingElement,
    pub e1: RingElement,
}

impl EncryptionRandomness {
    pub fn sample<R: Rng + ?Sized>(params: &SchemeParams, rng: &mut R) -> Self {
        let u = sample_ternary(params.ring(), rng);
        let e0 = sample_gaussian(params.ring(), params.noise(), rng);
        let e1 = sample_gaussian(params.ring(), params.noise(), rng);
        Self { u, e0, e1 }
    }

    pub fn zero(params: &SchemeParams) -> Self {
        let z = RingElement::zero(params.ring());
        Self {
            u: z.clone(),
            e0: z.clone(),
            e1: z,
        }
    }
}

fn scheme_mismatch(expected: Scheme, got: Scheme) -> Error {
    Error::SchemeMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}

/// `Δ·m` as a ring element. BFV coefficients must lie in `(-t/2, t/2]`;
/// CKKS values must satisfy `|v| ≤ B_m` and are encoded as `round(Δ·v)`.
pub(crate) fn encode_scaled(params: &SchemeParams, pt: &Plaintext) -> Result<RingElement> {
    let n = params.n();
    if pt.scheme() != params.scheme() {
        return Err(scheme_mismatch(params.scheme(), pt.scheme()));
    }
    if pt.len() > n {
        return Err(Error::LengthMismatch(format!("{} plaintext coefficients for n = {n}", pt.len())));
    }
    match pt {
        Plaintext::Bfv { coeffs } => {
            let t = BigInt::from(params.t().expect("BFV params carry t").clone());
            let mut m = vec![BigInt::zero(); n];
            for (i, c) in coeffs.iter().enumerate() {
                // centered range (-t/2, t/2]
                let twice = c * 2;
                if twice > t || twice <= -&t {
                    return Err(Error::PlaintextOutOfRange {
                        index: i,
                        detail: format!("{c} is outside (-t/2, t/2] for t = {t}"),
                    });
                }
                m[i] = c.clone();
            }
            let m = RingElement::from_bigints(params.ring(), &m)?;
            Ok(m.mul_scalar_residues(params.delta_residues()))
        }
        Plaintext::Ckks { values, delta } => {
            if delta != params.delta() {
                return Err(Error::PlaintextOutOfRange {
                    index: 0,
                    detail: format!("plaintext scale {delta} differs from the parameter scale {}", params.delta()),
                });
            }
            let d = to_rational(delta);
            let half = BigRational::new(1.into(), 2.into());
            let mut m = vec![BigInt::zero(); n];
            for (i, v) in values.iter().enumerate() {
                if &v.abs() > params.b_m() {
                    return Err(Error::PlaintextOutOfRange {
                        index: i,
                        detail: format!("|{v}| exceeds B_m = {}", params.b_m()),
                    });
                }
                m[i] = (&d * v + &half).floor().to_integer();
            }
            RingElement::from_bigints(params.ring(), &m)
        }
    }
}

pub fn encrypt<R: Rng + ?Sized>(
    params: &SchemeParams,
    pk: &PublicKey,
    pt: &Plaintext,
    rng: &mut R,
) -> Result<Ciphertext> {
    let scaled = encode_scaled(params, pt)?;
    let r = EncryptionRandomness::sample(params, rng);
    encrypt_scaled(params, pk, scaled, &r)
}

/// Encryption with caller-supplied randomness (deterministic test hook).
pub fn encrypt_with(
    params: &SchemeParams,
    pk: &PublicKey,
    pt: &Plaintext,
    r: &EncryptionRandomness,
) -> Result<Ciphertext> {
    let scaled = encode_scaled(params, pt)?;
    encrypt_scaled(params, pk, scaled, r)
}

fn encrypt_scaled(
    params: &SchemeParams,
    pk: &PublicKey,
    scaled: RingElement,
    r: &EncryptionRandomness,
) -> Result<Ciphertext> {
    let (p0, p1) = pk.ntt_parts();
    let u = r.u.to_ntt();
    let mut c0 = u.mul(p0)?;
    c0.intt_in_place();
    c0.add_assign(&r.e0)?;
    c0.add_assign(&scaled)?;
    let mut c1 = u.mul(p1)?;
    c1.intt_in_place();
    c1.add_assign(&r.e1)?;
    Ok(Ciphertext {
        c0,
        c1,
        scheme: params.scheme(),
        adds: 0,
    })
}

fn check_add(params: &SchemeParams, a: &Ciphertext, b: &Ciphertext) -> Result<u32> {
    if a.scheme != b.scheme {
        return Err(scheme_mismatch(a.scheme, b.scheme));
    }
    if a.scheme != params.scheme() {
        return Err(scheme_mismatch(params.scheme(), a.scheme));
    }
    let needed = a.adds as u64 + b.adds as u64 + 1;
    if needed > params.kappa() {
        return Err(Error::CapacityExceeded {
            needed,
            capacity: params.kappa(),
        });
    }
    Ok(needed as u32)
}

/// Component-wise sum; fails if the result would exceed the capacity κ.
pub fn add(params: &SchemeParams, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    let adds = check_add(params, a, b)?;
    Ok(Ciphertext {
        c0: a.c0.add(&b.c0)?,
        c1: a.c1.add(&b.c1)?,
        scheme: a.scheme,
        adds,
    })
}

/// `[c0 + c1·s]_q` in coefficient form.
pub fn decrypt_raw(sk: &SecretKey, ct: &Ciphertext) -> Result<RingElement> {
    let mut v = ct.c1.to_ntt().mul(sk.ntt())?;
    v.intt_in_place();
    v.add_assign(&ct.c0)?;
    Ok(v)
}

/// `[⌊(t/q)·x⌉]_t` per coefficient, rounding half up, centered in
/// `(-t/2, t/2]`.
pub(crate) fn bfv_round(params: &SchemeParams, x: &BigCoeffs) -> Vec<BigInt> {
    let t = BigInt::from(params.t().expect("BFV params carry t").clone());
    let q = BigInt::from(params.q().clone());
    let two_q = &q * 2;
    let two_t = &t * 2;
    x.coeffs()
        .iter()
        .map(|c| {
            // floor((2tc + q) / 2q) = floor(tc/q + 1/2)
            let num: BigInt = &two_t * c + &q;
            let m = num.div_floor(&two_q);
            let r = m.mod_floor(&t);
            if &r * 2 > t {
                r - &t
            } else {
                r
            }
        })
        .collect()
}

pub fn dec_bfv(params: &SchemeParams, sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext> {
    if params.scheme() != Scheme::Bfv || ct.scheme != Scheme::Bfv {
        return Err(scheme_mismatch(Scheme::Bfv, ct.scheme));
    }
    let x = crt_lift(&decrypt_raw(sk, ct)?);
    Ok(Plaintext::Bfv {
        coeffs: bfv_round(params, &x),
    })
}

/// Exact `x/Δ` per coefficient.
pub(crate) fn ckks_scale_down(params: &SchemeParams, x: &BigCoeffs) -> Plaintext {
    let d = BigInt::from(params.delta().clone());
    Plaintext::Ckks {
        values: x
            .coeffs()
            .iter()
            .map(|c| BigRational::new(c.clone(), d.clone()))
            .collect(),
        delta: params.delta().clone(),
    }
}

pub fn dec_ckks(params: &SchemeParams, sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext> {
    if params.scheme() != Scheme::Ckks || ct.scheme != Scheme::Ckks {
        return Err(scheme_mismatch(Scheme::Ckks, ct.scheme));
    }
    let x = crt_lift(&decrypt_raw(sk, ct)?);
    Ok(ckks_scale_down(params, &x))
}

pub fn decrypt(params: &SchemeParams, sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext> {
    match params.scheme() {
        Scheme::Bfv => dec_bfv(params, sk, ct),
        Scheme::Ckks => dec_ckks(params, sk, ct),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::he::{pubkeygen, seckeygen, setup, ModulusChoice, SchemeConfig};
    use crate::ring::NoiseSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::sync::Arc;

    fn spec() -> NoiseSpec {
        NoiseSpec::with_default_bound(3.2).unwrap()
    }

    fn bfv(n: usize, bits: u32, t: u64) -> Arc<SchemeParams> {
        setup(&SchemeConfig::bfv(n, ModulusChoice::Bits(bits), t, spec())).unwrap()
    }

    #[test]
    fn zero_randomness_gives_zero_ciphertext() {
        let p = bfv(64, 40, 257);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let sk = seckeygen(&p, &mut rng);
        let pk = pubkeygen(&p, &sk, &mut rng);
        let ct = encrypt_with(&p, &pk, &Plaintext::bfv_from_i64(&[0; 64]), &EncryptionRandomness::zero(&p)).unwrap();
        assert_eq!(ct.c0(), &RingElement::zero(p.ring()));
        assert_eq!(ct.c1(), &RingElement::zero(p.ring()));
    }

    #[test]
    fn noiseless_ciphertext_decrypts_exactly() {
        let p = bfv(16, 40, 17);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let sk = seckeygen(&p, &mut rng);
        let m: Vec<i64> = (0..16).map(|i| (i % 17) - 8).collect();
        let pt = Plaintext::bfv_from_i64(&m);
        let c0 = encode_scaled(&p, &pt).unwrap();
        let ct = Ciphertext::from_parts(c0, RingElement::zero(p.ring()), Scheme::Bfv, 0).unwrap();
        assert_eq!(dec_bfv(&p, &sk, &ct).unwrap(), pt);
    }

    #[test]
    fn round_trip_and_sum() {
        let p = bfv(256, 60, 65537);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let sk = seckeygen(&p, &mut rng);
        let pk = pubkeygen(&p, &sk, &mut rng);
        let m1: Vec<i64> = (0..256).map(|_| rng.random_range(-32768..=32768)).collect();
        let m2: Vec<i64> = (0..256).map(|_| rng.random_range(-32768..=32768)).collect();
        let c1 = encrypt(&p, &pk, &Plaintext::bfv_from_i64(&m1), &mut rng).unwrap();
        let c2 = encrypt(&p, &pk, &Plaintext::bfv_from_i64(&m2), &mut rng).unwrap();
        assert_eq!(dec_bfv(&p, &sk, &c1).unwrap(), Plaintext::bfv_from_i64(&m1));
        let s = add(&p, &c1, &c2).unwrap();
        assert_eq!(s.adds_consumed(), 1);
        let expected: Vec<i64> = m1
            .iter()
            .zip(&m2)
            .map(|(a, b)| {
                let r = (a + b).rem_euclid(65537);
                if 2 * r > 65537 {
                    r - 65537
                } else {
                    r
                }
            })
            .collect();
        assert_eq!(dec_bfv(&p, &sk, &s).unwrap(), Plaintext::bfv_from_i64(&expected));
        let zero = encrypt(&p, &pk, &Plaintext::bfv_from_i64(&[0]), &mut rng).unwrap();
        assert_eq!(dec_bfv(&p, &sk, &add(&p, &c1, &zero).unwrap()).unwrap(), Plaintext::bfv_from_i64(&m1));
    }

    #[test]
    fn out_of_range_plaintext_and_capacity() {
        let p = bfv(16, 20, 17);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let sk = seckeygen(&p, &mut rng);
        let pk = pubkeygen(&p, &sk, &mut rng);
        assert!(matches!(
            encrypt(&p, &pk, &Plaintext::bfv_from_i64(&[9]), &mut rng),
            Err(Error::PlaintextOutOfRange { index: 0, .. })
        ));
        assert!(encrypt(&p, &pk, &Plaintext::bfv_from_i64(&[8, -8]), &mut rng).is_ok());
        // q ≈ 2^20, t = 17: margin ≈ 30840, fresh noise 33·19.2 = 633.6 → κ = 47
        assert_eq!(p.kappa(), 47);
        let ct = encrypt(&p, &pk, &Plaintext::bfv_from_i64(&[1]), &mut rng).unwrap();
        let mut acc = ct.clone();
        for _ in 0..47 {
            acc = add(&p, &acc, &ct).unwrap();
        }
        assert!(matches!(add(&p, &acc, &ct), Err(Error::CapacityExceeded { needed: 48, .. })));
    }

    #[test]
    fn ckks_round_trip_within_fresh_bound() {
        let cfg = SchemeConfig::ckks(256, ModulusChoice::Bits(60), 1u64 << 20, spec());
        let p = setup(&cfg).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let sk = seckeygen(&p, &mut rng);
        let pk = pubkeygen(&p, &sk, &mut rng);
        let vals: Vec<f64> = (0..256).map(|i| (i as f64 / 256.0) - 0.5).collect();
        let pt = Plaintext::ckks_from_f64(&p, &vals).unwrap();
        let ct = encrypt(&p, &pk, &pt, &mut rng).unwrap();
        let out = dec_ckks(&p, &sk, &ct).unwrap();
        let eps = p.epsilon().unwrap();
        for (a, b) in out.ckks_values().unwrap().iter().zip(pt.ckks_values().unwrap()) {
            assert!((a - b).abs() < eps);
        }
    }
}
