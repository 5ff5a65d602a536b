use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Maximum `log2 q` per ring degree for 128-bit classical security with a
/// ternary secret, from the community homomorphic-encryption standard.
const STANDARD_128: [(usize, u64); 6] = [
    (1024, 27),
    (2048, 54),
    (4096, 109),
    (8192, 218),
    (16384, 438),
    (32768, 881),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecurityTable(BTreeMap<usize, u64>);

impl Default for SecurityTable {
    fn default() -> Self {
        Self(STANDARD_128.into_iter().collect())
    }
}

impl SecurityTable {
    pub fn empty() -> Self {
        Self(BTreeMap::new())
    }

    pub fn with_override(mut self, n: usize, max_bits: u64) -> Self {
        self.0.insert(n, max_bits);
        self
    }

    pub fn max_bits(&self, n: usize) -> Option<u64> {
        self.0.get(&n).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.0.iter().map(|(&n, &b)| (n, b))
    }
}

/// True iff `log2_q` is within the table's limit for `n`.
pub fn security_check(table: &SecurityTable, n: usize, log2_q: u64) -> Result<bool> {
    table
        .max_bits(n)
        .map(|max| log2_q <= max)
        .ok_or(Error::UnknownRingDegree(n))
}
