//! Threshold additive homomorphic encryption for private average aggregation.
//!
//! * [`ring`]: RNS/NTT arithmetic in `Z_q[x]/(x^n + 1)` and samplers.
//! * [`he`]: single-key additive BFV and CKKS (no slot packing).
//! * [`threshold`]: L-out-of-L additive key sharing, collective public key
//!   and collective decryption with smudging noise.
//! * [`planner`]: exact noise/modulus bounds, MBFV-vs-MCKKS comparison,
//!   region grids and RNS prime selection.
//! * [`harness`]: the simulated aggregation protocol, configs, transcripts
//!   and the self-test.

pub mod error;
pub mod exact;
pub mod harness;
pub mod he;
pub mod planner;
#[cfg(feature = "noise-probe")]
pub mod probe;
pub mod ring;
pub mod rng;
pub mod threshold;
pub mod wire;

pub use error::{Error, Result};
pub use he::{
    Ciphertext, Plaintext, PublicKey, Scheme, SchemeConfig, SchemeParams, SecretKey,
};
pub use planner::{PlanInputs, PlanReport, RegionGrid, Verdict};
pub use ring::{BigCoeffs, NoiseSpec, RingElement, RingParams};
pub use rng::RootSeed;
pub use threshold::{
    CollectivePublicKey, Crs, PartialDecryption, PkShare, SecretShare, SmudgeParams,
};
