//! Exact evaluation of the multiparty noise bounds, the minimum ciphertext
//! modulus for MBFV and MCKKS, the comparison between them, region grids and
//! RNS prime selection.

pub mod bounds;
mod grid;
mod report;
mod security;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{min_bits_exceeding, pow2, rational_from_f64};
use crate::he::{ModulusChoice, Scheme, SchemeConfig};
use crate::ring::modulus::select_primes;
use crate::ring::{NoiseSpec, RingParams};
use bounds::{
    analytic_scale, mckks_wins_by_scale, mckks_wins_closed_form, mp_bounds, qmin_mbfv_threshold,
    qmin_mckks_threshold, scale_from_eps, to_rational, MpBounds,
};

pub use grid::{interval_approx_check, region_grid, ColumnApprox, GridCell, IntervalReport, RegionGrid};
pub use report::ReferenceSet;
pub use security::{security_check, SecurityTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "MCKKS_smaller_q")]
    MckksSmallerQ,
    #[serde(rename = "MBFV_smaller_or_equal")]
    MbfvSmallerOrEqual,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::MckksSmallerQ => "MCKKS_smaller_q",
            Verdict::MbfvSmallerOrEqual => "MBFV_smaller_or_equal",
        }
    }

    pub fn mckks_wins(self) -> bool {
        self == Verdict::MckksSmallerQ
    }
}

/// Planner inputs. `t = 2^t_bits` unless `plaintext_modulus` is given;
/// `ε^{-1} = 2^eps_inv_bits`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanInputs {
    pub n: usize,
    pub parties: usize,
    pub sigma: f64,
    pub bound: BigRational,
    pub lambda: u32,
    pub t_bits: u32,
    pub plaintext_modulus: Option<BigUint>,
    pub eps_inv_bits: u32,
    pub b_m: BigRational,
    /// Scheme to select primes for; the cheaper one when `None`.
    pub scheme: Option<Scheme>,
    pub enforce_security: bool,
    pub security: SecurityTable,
}

impl PlanInputs {
    /// Inputs with `B = 6σ`, `B_m = 1`, security enforced.
    pub fn new(n: usize, parties: usize, sigma: f64, lambda: u32, t_bits: u32, eps_inv_bits: u32) -> Self {
        Self {
            n,
            parties,
            sigma,
            bound: rational_from_f64(sigma) * to_rational(&BigUint::from(6u32)),
            lambda,
            t_bits,
            plaintext_modulus: None,
            eps_inv_bits,
            b_m: BigRational::one(),
            scheme: None,
            enforce_security: true,
            security: SecurityTable::default(),
        }
    }

    pub fn t(&self) -> BigUint {
        self.plaintext_modulus.clone().unwrap_or_else(|| pow2(self.t_bits as u64))
    }

    pub fn eps_inv(&self) -> BigUint {
        pow2(self.eps_inv_bits as u64)
    }

    pub fn noise_spec(&self) -> Result<NoiseSpec> {
        NoiseSpec::new(self.sigma, self.bound.clone())
    }

    pub fn bounds(&self) -> MpBounds {
        mp_bounds(self.n, self.parties, &self.bound, self.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 4 {
            return Err(Error::InvalidParams(format!("n = {} must be a power of two ≥ 4", self.n)));
        }
        if self.parties == 0 {
            return Err(Error::InvalidParams("parties must be positive".into()));
        }
        self.noise_spec()?;
        if !self.bound.is_positive() {
            return Err(Error::InvalidParams("noise bound B must be positive".into()));
        }
        if self.t() < BigUint::from(2u32) {
            return Err(Error::InvalidParams("t must be at least 2".into()));
        }
        if !self.b_m.is_positive() {
            return Err(Error::InvalidParams("b_m must be positive".into()));
        }
        if self.scheme == Some(Scheme::Ckks) && self.b_m > BigRational::one() {
            return Err(Error::InvalidParams("MCKKS inputs must be normalized so that b_m ≤ 1".into()));
        }
        Ok(())
    }

    /// Scheme configuration that runs with the primes of `report`.
    pub fn scheme_config(&self, report: &PlanReport) -> Result<SchemeConfig> {
        let noise = self.noise_spec()?;
        let modulus = ModulusChoice::Primes(report.primes.clone());
        let cfg = match report.scheme {
            Scheme::Bfv => SchemeConfig::bfv(self.n, modulus, self.t(), noise),
            Scheme::Ckks => {
                let mut c = SchemeConfig::ckks(self.n, modulus, self.eps_inv(), noise);
                c.b_m = self.b_m.clone();
                c
            }
        };
        Ok(cfg.with_parties(self.parties, Some(self.lambda)))
    }
}

/// Bits of the smallest q with `q > 2t·b + t²`.
pub fn qmin_mbfv(t: &BigUint, b_ct_mp: &BigRational) -> u64 {
    min_bits_exceeding(&qmin_mbfv_threshold(t, b_ct_mp))
}

/// Bits of the smallest q with `q > 2(Δ·B_m + b)`.
pub fn qmin_mckks(delta: &BigRational, b_m: &BigRational, b_ct_mp: &BigRational) -> u64 {
    min_bits_exceeding(&qmin_mckks_threshold(delta, b_m, b_ct_mp))
}

/// MCKKS needs a smaller q iff `t²/(2b) + t − 1 > ε^{-1}`.
pub fn winner(t: &BigUint, eps_inv: &BigUint, b_ct_mp: &BigRational) -> Verdict {
    if mckks_wins_closed_form(t, eps_inv, b_ct_mp) {
        Verdict::MckksSmallerQ
    } else {
        Verdict::MbfvSmallerOrEqual
    }
}

/// Fewest NTT primes for degree `n` whose product exceeds `x`.
pub fn select_primes_exceeding(n: usize, x: &BigRational) -> Result<Vec<u64>> {
    let mut bits = min_bits_exceeding(x).max(1) as u32;
    loop {
        let primes = select_primes(n, bits)?;
        let q = primes.iter().fold(BigUint::one(), |acc, &p| acc * p);
        if to_rational(&q) > *x {
            return Ok(primes);
        }
        bits += 1;
    }
}

/// Everything the planner derives from [`PlanInputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub inputs: PlanInputs,
    pub t: BigUint,
    pub eps_inv: BigUint,
    pub bounds: MpBounds,
    pub qmin_mbfv_bits: u64,
    /// With the analytic scale `Δ = b·ε^{-1}/B_m`.
    pub qmin_mckks_bits: u64,
    /// With the power-of-two scale actually used for encryption.
    pub qmin_mckks_pow2_bits: u64,
    pub delta_ckks: BigUint,
    pub winner: Verdict,
    pub scale_condition_holds: bool,
    pub scheme: Scheme,
    pub primes: Vec<u64>,
    pub log2_q: u64,
    pub security_max_bits: Option<u64>,
    pub security_ok: bool,
    pub reference: Option<ReferenceSet>,
}

pub fn plan(inputs: &PlanInputs) -> Result<PlanReport> {
    inputs.validate()?;
    let bounds = inputs.bounds();
    let b = &bounds.b_ct_mp;
    let t = inputs.t();
    let eps_inv = inputs.eps_inv();

    let x_bfv = qmin_mbfv_threshold(&t, b);
    let delta_analytic = analytic_scale(&eps_inv, &inputs.b_m, b);
    let x_ckks = qmin_mckks_threshold(&delta_analytic, &inputs.b_m, b);
    let delta_ckks = scale_from_eps(&eps_inv, b);
    let x_ckks_pow2 = qmin_mckks_threshold(&to_rational(&delta_ckks), &inputs.b_m, b);

    let verdict = winner(&t, &eps_inv, b);
    let scale_condition_holds = t > BigUint::one() && mckks_wins_by_scale(&t, &delta_analytic, &inputs.b_m, b);
    let scheme = inputs.scheme.unwrap_or(match verdict {
        Verdict::MckksSmallerQ => Scheme::Ckks,
        Verdict::MbfvSmallerOrEqual => Scheme::Bfv,
    });
    let target = match scheme {
        Scheme::Bfv => &x_bfv,
        Scheme::Ckks => &x_ckks_pow2,
    };
    let primes = select_primes_exceeding(inputs.n, target)?;
    let log2_q = RingParams::new(inputs.n, &primes)?.log2_q();
    let security_max_bits = inputs.security.max_bits(inputs.n);
    let security_ok = security_max_bits.is_some_and(|max| log2_q <= max);
    if inputs.enforce_security {
        match security_max_bits {
            None => return Err(Error::UnknownRingDegree(inputs.n)),
            Some(max) if log2_q > max => {
                return Err(Error::InsecureModulus {
                    n: inputs.n,
                    log2_q,
                    max_bits: max,
                })
            }
            Some(_) => {}
        }
    }
    Ok(PlanReport {
        reference: ReferenceSet::matching(inputs, scheme),
        inputs: inputs.clone(),
        t,
        eps_inv,
        qmin_mbfv_bits: min_bits_exceeding(&x_bfv),
        qmin_mckks_bits: min_bits_exceeding(&x_ckks),
        qmin_mckks_pow2_bits: min_bits_exceeding(&x_ckks_pow2),
        bounds,
        delta_ckks,
        winner: verdict,
        scale_condition_holds,
        scheme,
        primes,
        log2_q,
        security_max_bits,
        security_ok,
    })
}
