use serde::Serialize;

use super::{PlanInputs, PlanReport};
use crate::exact::{format_rational, log2_rational};
use crate::he::Scheme;

/// Published parameter sets (n = 16384, λ = 128, σ = 3.2) whose modulus
/// sizes are carried along as annotations. They come from a library-specific
/// derivation and are never compared for equality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceSet {
    pub label: &'static str,
    pub limbs: u32,
    pub log2_q: u32,
    pub qmin_mbfv_bits: Option<u32>,
    pub qmin_mckks_bits: Option<u32>,
}

impl ReferenceSet {
    pub(crate) fn matching(inputs: &PlanInputs, scheme: Scheme) -> Option<Self> {
        if inputs.n != 16384 || inputs.lambda != 128 || inputs.plaintext_modulus.is_some() {
            return None;
        }
        match (inputs.parties, inputs.t_bits, inputs.eps_inv_bits, scheme) {
            (16, 45, 45, _) => Some(Self {
                label: "set-1",
                limbs: 4,
                log2_q: 240,
                qmin_mbfv_bits: Some(232),
                qmin_mckks_bits: Some(238),
            }),
            (32, 60, _, Scheme::Bfv) => Some(Self {
                label: "set-2",
                limbs: 10,
                log2_q: 300,
                qmin_mbfv_bits: Some(280),
                qmin_mckks_bits: None,
            }),
            (32, _, 60, Scheme::Ckks) => Some(Self {
                label: "set-3",
                limbs: 9,
                log2_q: 270,
                qmin_mbfv_bits: None,
                qmin_mckks_bits: Some(259),
            }),
            _ => None,
        }
    }
}

#[derive(Serialize)]
struct InputsView {
    n: usize,
    parties: usize,
    sigma: f64,
    bound: String,
    lambda: u32,
    t: String,
    eps_inv_bits: u32,
    b_m: String,
    enforce_security: bool,
}

#[derive(Serialize)]
struct BoundsView {
    b_fresh: String,
    b_fresh_mp: String,
    b_ct: String,
    b_smg: String,
    b_ct_mp: String,
    log2_b_ct_mp: String,
}

#[derive(Serialize)]
struct ModulusView {
    qmin_mbfv_bits: u64,
    qmin_mckks_bits: u64,
    qmin_mckks_pow2_bits: u64,
    delta_ckks_bits: u64,
    winner: &'static str,
    scale_condition_holds: bool,
}

#[derive(Serialize)]
struct SelectionView {
    scheme: &'static str,
    primes: Vec<u64>,
    limbs: usize,
    log2_q: u64,
    security_max_bits: Option<u64>,
    security_ok: bool,
}

#[derive(Serialize)]
struct ReportView<'a> {
    inputs: InputsView,
    bounds: BoundsView,
    modulus: ModulusView,
    selection: SelectionView,
    reference: Option<&'a ReferenceSet>,
}

impl PlanReport {
    /// Key/value text with a fixed key order; exact rationals are written as
    /// `num/den`.
    pub fn to_text(&self) -> String {
        let b = &self.bounds;
        let view = ReportView {
            inputs: InputsView {
                n: self.inputs.n,
                parties: self.inputs.parties,
                sigma: self.inputs.sigma,
                bound: format_rational(&self.inputs.bound),
                lambda: self.inputs.lambda,
                t: self.t.to_string(),
                eps_inv_bits: self.inputs.eps_inv_bits,
                b_m: format_rational(&self.inputs.b_m),
                enforce_security: self.inputs.enforce_security,
            },
            bounds: BoundsView {
                b_fresh: format_rational(&b.b_fresh),
                b_fresh_mp: format_rational(&b.b_fresh_mp),
                b_ct: format_rational(&b.b_ct),
                b_smg: format_rational(&b.b_smg),
                b_ct_mp: format_rational(&b.b_ct_mp),
                log2_b_ct_mp: format!("{:.4}", log2_rational(&b.b_ct_mp)),
            },
            modulus: ModulusView {
                qmin_mbfv_bits: self.qmin_mbfv_bits,
                qmin_mckks_bits: self.qmin_mckks_bits,
                qmin_mckks_pow2_bits: self.qmin_mckks_pow2_bits,
                delta_ckks_bits: self.delta_ckks.bits().saturating_sub(1),
                winner: self.winner.as_str(),
                scale_condition_holds: self.scale_condition_holds,
            },
            selection: SelectionView {
                scheme: self.scheme.name(),
                primes: self.primes.clone(),
                limbs: self.primes.len(),
                log2_q: self.log2_q,
                security_max_bits: self.security_max_bits,
                security_ok: self.security_ok,
            },
            reference: self.reference.as_ref(),
        };
        toml::to_string(&view).expect("report view serializes")
    }
}
