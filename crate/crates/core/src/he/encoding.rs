use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{Scheme, SchemeParams};
use crate::error::{Error, Result};
use crate::exact::{pow2_rational, rational};

/// A message for one ciphertext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Plaintext {
    /// Integers mod t, centered in `(-t/2, t/2]`.
    Bfv { coeffs: Vec<BigInt> },
    /// Exact rationals together with the scale they are encoded under.
    Ckks { values: Vec<BigRational>, delta: BigUint },
}

impl Plaintext {
    pub fn bfv(coeffs: Vec<BigInt>) -> Self {
        Plaintext::Bfv { coeffs }
    }

    pub fn bfv_from_i64(coeffs: &[i64]) -> Self {
        Plaintext::Bfv {
            coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }

    /// CKKS message under the scale of `params`.
    pub fn ckks(params: &SchemeParams, values: Vec<BigRational>) -> Self {
        Plaintext::Ckks {
            values,
            delta: params.delta().clone(),
        }
    }

    /// CKKS message holding the exact binary values of `values`.
    pub fn ckks_from_f64(params: &SchemeParams, values: &[f64]) -> Result<Self> {
        let values = values
            .iter()
            .map(|&v| BigRational::from_float(v).ok_or_else(|| Error::PlaintextOutOfRange {
                index: 0,
                detail: format!("{v} is not finite"),
            }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::ckks(params, values))
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            Plaintext::Bfv { .. } => Scheme::Bfv,
            Plaintext::Ckks { .. } => Scheme::Ckks,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Plaintext::Bfv { coeffs } => coeffs.len(),
            Plaintext::Ckks { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bfv_coeffs(&self) -> Option<&[BigInt]> {
        match self {
            Plaintext::Bfv { coeffs } => Some(coeffs),
            Plaintext::Ckks { .. } => None,
        }
    }

    pub fn ckks_values(&self) -> Option<&[BigRational]> {
        match self {
            Plaintext::Ckks { values, .. } => Some(values),
            Plaintext::Bfv { .. } => None,
        }
    }

    /// Lossy view for reporting.
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Plaintext::Bfv { coeffs } => coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect(),
            Plaintext::Ckks { values, .. } => values.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }
}

/// Fixed-point quantization of a real vector into a BFV plaintext:
/// `coeff_i = round(2^p · w_i)`. Rejects inputs whose sum over all
/// `params.parties()` clients could wrap modulo t.
pub fn encode_fixed(params: &SchemeParams, w: &[f64], p: u32) -> Result<Plaintext> {
    let t = match (params.scheme(), params.t()) {
        (Scheme::Bfv, Some(t)) => t,
        _ => {
            return Err(Error::SchemeMismatch {
                expected: Scheme::Bfv.to_string(),
                got: params.scheme().to_string(),
            })
        }
    };
    if w.len() > params.n() {
        return Err(Error::LengthMismatch(format!("{} values for n = {}", w.len(), params.n())));
    }
    if p > 1000 {
        return Err(Error::OverflowRisk(format!("scale 2^{p} is out of range")));
    }
    let scale = 2f64.powi(p as i32);
    let mut coeffs = Vec::with_capacity(w.len());
    let mut max_abs = BigInt::zero();
    for (i, &x) in w.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::OverflowRisk(format!("value {i} is not finite")));
        }
        let c = if p <= 52 && (x * scale).abs() < 9.0e15 {
            BigInt::from((x * scale).round() as i64)
        } else {
            // round half away from zero, exactly
            let r = BigRational::from_float(x).expect("finite") * pow2_rational(p as u64);
            let half = BigRational::new(1.into(), 2.into());
            if r.is_negative() {
                -((-r) + half).floor().to_integer()
            } else {
                (r + half).floor().to_integer()
            }
        };
        if c.abs() > max_abs {
            max_abs = c.abs();
        }
        coeffs.push(c);
    }
    // L·max|c| < t/2
    let lhs = BigInt::from(2 * params.parties() as u64) * &max_abs;
    if lhs >= BigInt::from(t.clone()) {
        return Err(Error::OverflowRisk(format!(
            "{} parties at scale 2^{p} reach {} but t/2 is {}",
            params.parties(),
            &max_abs * BigInt::from(params.parties()),
            t / 2u32
        )));
    }
    Ok(Plaintext::Bfv { coeffs })
}

/// Exact inverse of [`encode_fixed`] followed by division by `parties`:
/// `coeff_i / (2^p · L)`.
pub fn decode_fixed_exact(pt: &Plaintext, p: u32, parties: usize) -> Result<Vec<BigRational>> {
    let coeffs = pt.bfv_coeffs().ok_or_else(|| Error::SchemeMismatch {
        expected: Scheme::Bfv.to_string(),
        got: pt.scheme().to_string(),
    })?;
    let den = pow2_rational(p as u64) * rational(parties as u64);
    Ok(coeffs
        .iter()
        .map(|c| BigRational::from_integer(c.clone()) / &den)
        .collect())
}

pub fn decode_fixed(pt: &Plaintext, p: u32, parties: usize) -> Result<Vec<f64>> {
    Ok(decode_fixed_exact(pt, p, parties)?
        .iter()
        .map(|v| v.to_f64().unwrap_or(f64::NAN))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::he::{setup, ModulusChoice, SchemeConfig};
    use crate::ring::NoiseSpec;
    use proptest::prelude::*;

    fn params(t_bits: u32, parties: usize) -> std::sync::Arc<SchemeParams> {
        let spec = NoiseSpec::with_default_bound(3.2).unwrap();
        let cfg = SchemeConfig::bfv(16, ModulusChoice::Bits(120), BigUint::from(1u32) << t_bits, spec);
        let mut cfg = cfg;
        cfg.parties = parties;
        setup(&cfg).unwrap()
    }

    #[test]
    fn zero_and_dyadic() {
        let p = params(20, 1);
        let pt = encode_fixed(&p, &[0.0; 16], 10).unwrap();
        assert!(pt.bfv_coeffs().unwrap().iter().all(|c| c.is_zero()));
        let pt = encode_fixed(&p, &[0.5], 10).unwrap();
        assert_eq!(pt.bfv_coeffs().unwrap()[0], BigInt::from(512));
        assert_eq!(decode_fixed(&pt, 10, 1).unwrap(), vec![0.5]);
    }

    #[test]
    fn overflow_is_rejected() {
        let p = params(12, 4);
        // 4 · 2^10 · 1 = 2^12 ≥ t/2 = 2^11
        assert!(matches!(encode_fixed(&p, &[1.0], 10), Err(Error::OverflowRisk(_))));
        assert!(encode_fixed(&p, &[0.2], 8).is_ok());
    }

    proptest! {
        #[test]
        fn quantization_error_is_half_ulp(w in proptest::collection::vec(-1.0f64..1.0, 16), p in 1u32..40) {
            let prm = params(50, 1);
            let pt = encode_fixed(&prm, &w, p).unwrap();
            let back = decode_fixed_exact(&pt, p, 1).unwrap();
            let tol = BigRational::new(1.into(), BigInt::from(2u64) << p);
            for (x, y) in w.iter().zip(&back) {
                prop_assert!((BigRational::from_float(*x).unwrap() - y).abs() <= tol);
            }
        }
    }
}
