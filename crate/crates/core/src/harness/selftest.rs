use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::config::ProtocolConfig;
use super::protocol::run_protocol;
use crate::error::{Error, Result};
use crate::exact::pow2;
use crate::he::{
    add, decrypt, decrypt_raw, encrypt, pubkeygen, seckeygen, setup, ModulusChoice, Plaintext, Scheme,
    SchemeConfig, SchemeParams,
};
use crate::planner::bounds::{analytic_scale, mckks_wins_closed_form, qmin_mbfv_threshold, qmin_mckks_threshold, to_rational};
use crate::planner::PlanInputs;
use crate::ring::modulus::select_primes;
use crate::ring::{crt_lift, ring_mul_schoolbook, sample_uniform, NoiseSpec, RingParams};
use crate::wire;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// A deliberately invalid configuration was rejected, as it should be.
    ExpectedReject,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::ExpectedReject => "PASS (expected reject)",
                Status::Fail => "FAIL",
            };
            writeln!(f, "{tag:<22} {:<28} {:>7.2}s  {}", c.name, c.seconds, c.detail)?;
        }
        let failed = self.checks.iter().filter(|c| c.status == Status::Fail).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

type Check = fn() -> Result<(Status, String)>;

const CHECKS: [(&str, Check); 10] = [
    ("ntt_matches_schoolbook", ntt_matches_schoolbook),
    ("fresh_noise_bound", fresh_noise_bound),
    ("bfv_round_trip", bfv_round_trip),
    ("ckks_within_eps", ckks_within_eps),
    ("capacity_is_enforced", capacity_enforced),
    ("planted_bound_violation", planted_violation),
    ("closed_form_matches_direct", closed_form_matches_direct),
    ("wire_round_trip", wire_round_trip),
    ("mbfv_protocol_exact", || protocol(Scheme::Bfv)),
    ("mckks_protocol_within_eps", || protocol(Scheme::Ckks)),
];

/// Runs every check at small parameters. Failures are report content,
/// never errors.
pub fn selftest() -> SelftestReport {
    let checks = CHECKS
        .iter()
        .map(|&(name, check)| {
            let t = Instant::now();
            let (status, detail) = match check() {
                Ok(r) => r,
                Err(e) => (Status::Fail, format!("error: {e}")),
            };
            CheckOutcome {
                name,
                status,
                detail,
                seconds: t.elapsed().as_secs_f64(),
            }
        })
        .collect();
    SelftestReport { checks }
}

fn verdict(ok: bool, detail: String) -> (Status, String) {
    (if ok { Status::Pass } else { Status::Fail }, detail)
}

fn bfv_params(n: usize, bits: u32, t: u64) -> Result<Arc<SchemeParams>> {
    setup(&SchemeConfig::bfv(n, ModulusChoice::Bits(bits), t, NoiseSpec::with_default_bound(3.2)?))
}

fn ntt_matches_schoolbook() -> Result<(Status, String)> {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut bad = 0;
    for n in [4, 8, 16] {
        let ring = RingParams::new(n, &select_primes(n, 100)?)?;
        for _ in 0..100 {
            let a = sample_uniform(&ring, &mut rng);
            let b = sample_uniform(&ring, &mut rng);
            let fast = a.to_ntt().mul(&b.to_ntt())?.to_coefficient();
            bad += (fast != ring_mul_schoolbook(&a, &b)?) as usize;
        }
    }
    Ok(verdict(bad == 0, format!("{bad} of 300 products differ")))
}

/// `‖[c0 + c1·s]_q − Δm‖∞` with the difference centered mod q.
fn fresh_noise(params: &SchemeParams, phase: &[BigInt], m: &[i64]) -> BigUint {
    let q = BigInt::from(params.q().clone());
    let delta = BigInt::from(params.delta().clone());
    phase
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let d = (x - &delta * m.get(i).copied().unwrap_or(0)).mod_floor(&q);
            let d = if &d * 2 > q { d - &q } else { d };
            d.abs().to_biguint().expect("non-negative")
        })
        .max()
        .unwrap_or_default()
}

fn fresh_noise_bound() -> Result<(Status, String)> {
    let p = bfv_params(64, 60, 257)?;
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let sk = seckeygen(&p, &mut rng);
    let pk = pubkeygen(&p, &sk, &mut rng);
    let bound = &p.bounds().b_fresh;
    let mut worst = BigUint::default();
    for _ in 0..100 {
        let m: Vec<i64> = (0..64).map(|_| rng.random_range(-128..=128)).collect();
        let ct = encrypt(&p, &pk, &Plaintext::bfv_from_i64(&m), &mut rng)?;
        let phase = crt_lift(&decrypt_raw(&sk, &ct)?);
        worst = worst.max(fresh_noise(&p, phase.coeffs(), &m));
    }
    let ok = to_rational(&worst) <= *bound;
    Ok(verdict(ok, format!("max noise {worst} vs (2n+1)B = {}", bound.to_integer())))
}

fn bfv_round_trip() -> Result<(Status, String)> {
    let p = bfv_params(64, 60, 65537)?;
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let sk = seckeygen(&p, &mut rng);
    let pk = pubkeygen(&p, &sk, &mut rng);
    let mut bad = 0;
    for _ in 0..100 {
        let m: Vec<i64> = (0..64).map(|_| rng.random_range(-32768..=32768)).collect();
        let pt = Plaintext::bfv_from_i64(&m);
        let ct = encrypt(&p, &pk, &pt, &mut rng)?;
        bad += (decrypt(&p, &sk, &ct)? != pt) as usize;
    }
    Ok(verdict(bad == 0, format!("{bad} of 100 round trips failed")))
}

fn ckks_within_eps() -> Result<(Status, String)> {
    let cfg = SchemeConfig::ckks(64, ModulusChoice::Bits(60), pow2(20), NoiseSpec::with_default_bound(3.2)?);
    let p = setup(&cfg)?;
    let eps = p.epsilon().expect("CKKS has ε");
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let sk = seckeygen(&p, &mut rng);
    let pk = pubkeygen(&p, &sk, &mut rng);
    let mut bad = 0;
    for _ in 0..20 {
        let v: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pt = Plaintext::ckks_from_f64(&p, &v)?;
        let out = decrypt(&p, &sk, &encrypt(&p, &pk, &pt, &mut rng)?)?;
        let (a, b) = (pt.ckks_values().unwrap(), out.ckks_values().unwrap());
        bad += a.iter().zip(b).filter(|(x, y)| (*x - *y).abs() >= eps).count();
    }
    Ok(verdict(bad == 0, format!("{bad} coordinates at or above ε")))
}

fn capacity_enforced() -> Result<(Status, String)> {
    let p = bfv_params(16, 20, 17)?;
    let kappa = p.kappa();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let sk = seckeygen(&p, &mut rng);
    let pk = pubkeygen(&p, &sk, &mut rng);
    let one = Plaintext::bfv_from_i64(&[1]);
    let mut acc = encrypt(&p, &pk, &one, &mut rng)?;
    for _ in 0..kappa {
        acc = add(&p, &acc, &encrypt(&p, &pk, &one, &mut rng)?)?;
    }
    let got = decrypt(&p, &sk, &acc)?;
    let want = {
        let s = (kappa as i64 + 1).rem_euclid(17);
        let mut m = vec![0; 16];
        m[0] = if s > 8 { s - 17 } else { s };
        Plaintext::bfv_from_i64(&m)
    };
    let over = add(&p, &acc, &encrypt(&p, &pk, &one, &mut rng)?);
    let ok = got == want && matches!(over, Err(Error::CapacityExceeded { .. }));
    Ok(verdict(ok, format!("κ = {kappa}; sum of κ+1 fresh ciphertexts decrypts, one more is refused")))
}

fn planted_violation() -> Result<(Status, String)> {
    // 24-bit q cannot hold (2n+1)B with t = 2^16 at n = 64
    match bfv_params(64, 24, 1 << 16) {
        Err(e @ Error::BoundViolation { .. }) => Ok((Status::ExpectedReject, e.to_string())),
        Err(e) => Ok((Status::Fail, format!("rejected for the wrong reason: {e}"))),
        Ok(_) => Ok((Status::Fail, "undersized modulus was accepted".into())),
    }
}

fn closed_form_matches_direct() -> Result<(Status, String)> {
    let inputs = PlanInputs::new(8192, 10, 3.2, 32, 0, 0);
    let b = inputs.bounds().b_ct_mp;
    let mut bad = 0;
    let mut cells = 0;
    for tb in 8..=48u64 {
        for eb in 8..=48u64 {
            let (t, e) = (pow2(tb), pow2(eb));
            let delta = analytic_scale(&e, &inputs.b_m, &b);
            let direct = qmin_mckks_threshold(&delta, &inputs.b_m, &b) < qmin_mbfv_threshold(&t, &b);
            bad += (direct != mckks_wins_closed_form(&t, &e, &b)) as usize;
            cells += 1;
        }
    }
    Ok(verdict(bad == 0, format!("{bad} of {cells} cells disagree")))
}

fn wire_round_trip() -> Result<(Status, String)> {
    let p = bfv_params(64, 80, 257)?;
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let sk = seckeygen(&p, &mut rng);
    let pk = pubkeygen(&p, &sk, &mut rng);
    let ct = encrypt(&p, &pk, &Plaintext::bfv_from_i64(&[1, 2, 3]), &mut rng)?;
    let bytes = wire::encode_ciphertext(&ct);
    let ok = wire::decode_ciphertext(p.ring(), &bytes)? == ct;
    Ok(verdict(ok, format!("{} bytes", bytes.len())))
}

fn protocol(scheme: Scheme) -> Result<(Status, String)> {
    let cfg = ProtocolConfig::new(scheme, 256, 3, 16, 700, 9);
    let t = run_protocol(&cfg)?.transcript;
    Ok(verdict(
        t.failures() == 0,
        format!("{} failures, max error {:.3e}", t.failures(), t.max_abs_error()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_checkout_passes() {
        let r = selftest();
        assert!(r.all_passed(), "{r}");
        let planted = r.checks.iter().find(|c| c.name == "planted_bound_violation").unwrap();
        assert_eq!(planted.status, Status::ExpectedReject);
        assert!(r.checks.iter().any(|c| c.name == "ntt_matches_schoolbook"));
    }
}
