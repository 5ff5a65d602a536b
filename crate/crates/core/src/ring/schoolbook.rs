use super::{Domain, RingElement};
use crate::error::{Error, Result};

/// O(n²) negacyclic product computed residue-by-residue without any NTT.
/// Reference path for checking [`RingElement::mul`]; use only for small n.
pub fn ring_mul_schoolbook(a: &RingElement, b: &RingElement) -> Result<RingElement> {
    if a.params() != b.params() {
        return Err(Error::ParamsMismatch);
    }
    let a = a.to_coefficient();
    let b = b.to_coefficient();
    let params = a.params().clone();
    let n = params.n();
    let mut out = vec![0u64; n * params.num_primes()];
    for (j, m) in params.moduli().iter().enumerate() {
        let (la, lb) = (a.limb(j), b.limb(j));
        let dst = &mut out[j * n..(j + 1) * n];
        for (i, &x) in la.iter().enumerate() {
            for (k, &y) in lb.iter().enumerate() {
                let prod = m.mul(x, y);
                let idx = i + k;
                if idx < n {
                    dst[idx] = m.add(dst[idx], prod);
                } else {
                    // x^n = -1
                    dst[idx - n] = m.sub(dst[idx - n], prod);
                }
            }
        }
    }
    RingElement::from_residues(&params, Domain::Coefficient, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingParams;

    #[test]
    fn hand_convolution() {
        // (1 + x)·x = x + x² in Z_17[x]/(x^4 + 1)
        let p = RingParams::new(4, &[17]).unwrap();
        let a = RingElement::from_i64(&p, &[1, 1, 0, 0]).unwrap();
        let x = RingElement::from_i64(&p, &[0, 1, 0, 0]).unwrap();
        let prod = ring_mul_schoolbook(&a, &x).unwrap();
        assert_eq!(prod.limb(0), &[0, 1, 1, 0]);
    }

    #[test]
    fn zero_annihilates_and_product_commutes() {
        let p = RingParams::new(8, &[17, 97]).unwrap();
        let a = RingElement::from_i64(&p, &[3, -1, 4, 1, -5, 9, 2, -6]).unwrap();
        let b = RingElement::from_i64(&p, &[2, 7, -1, 8, 2, -8, 1, 8]).unwrap();
        let z = RingElement::zero(&p);
        assert_eq!(ring_mul_schoolbook(&a, &z).unwrap(), z);
        assert_eq!(
            ring_mul_schoolbook(&a, &b).unwrap(),
            ring_mul_schoolbook(&b, &a).unwrap()
        );
    }
}
