use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exact::parse_decimal;
use crate::he::Scheme;
use crate::planner::{PlanInputs, SecurityTable};
use crate::rng::RootSeed;

/// Everything needed to run the aggregation protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    /// Planner inputs; `plan.scheme` is always set.
    pub plan: PlanInputs,
    /// Number of model parameters per client.
    pub model_size: usize,
    pub seed: RootSeed,
    /// Fixed-point bits `p` for MBFV inputs.
    pub fixed_point_bits: u32,
    pub rounds: u32,
    pub parallel_clients: bool,
    /// Explicit RNS primes in place of the planner's choice. Setup still
    /// checks them against the noise bounds.
    pub primes: Option<Vec<u64>>,
    pub output: OutputPaths,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutputPaths {
    pub transcript: Option<PathBuf>,
    pub timings: Option<PathBuf>,
    pub aggregate: Option<PathBuf>,
}

impl ProtocolConfig {
    /// A config with `B = 6σ`, `σ = 3.2`, one round, sequential clients and
    /// security enforcement off. `t` leaves one spare bit above `2·L·2^p`.
    pub fn new(scheme: Scheme, n: usize, parties: usize, lambda: u32, model_size: usize, seed: u64) -> Self {
        let p = 16;
        let mut plan = PlanInputs::new(n, parties, 3.2, lambda, headroom_t_bits(p, parties), DEFAULT_EPS_INV_BITS);
        plan.scheme = Some(scheme);
        plan.enforce_security = false;
        Self {
            plan,
            model_size,
            seed: RootSeed::from_u64(seed),
            fixed_point_bits: p,
            rounds: 1,
            parallel_clients: false,
            primes: None,
            output: OutputPaths::default(),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.plan.scheme.expect("protocol configs always carry a scheme")
    }

    pub fn parties(&self) -> usize {
        self.plan.parties
    }

    pub fn n(&self) -> usize {
        self.plan.n
    }

    /// `⌈N/n⌉`
    pub fn chunks(&self) -> usize {
        self.model_size.div_ceil(self.plan.n)
    }

    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        if self.plan.parties > u16::MAX as usize {
            return Err(Error::InvalidParams("at most 65535 parties".into()));
        }
        if self.model_size == 0 {
            return Err(Error::InvalidParams("model_size must be positive".into()));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidParams("rounds must be positive".into()));
        }
        if self.fixed_point_bits > 52 {
            return Err(Error::InvalidParams("fixed_point_bits must be at most 52".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.into_config()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    plan: RawPlan,
    protocol: RawProtocol,
    #[serde(default)]
    output: RawOutput,
    /// Maximum `log2 q` per ring degree, overriding the built-in table.
    #[serde(default)]
    security: BTreeMap<String, u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawPlan {
    pub n: usize,
    pub parties: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Decimal string; `6σ` when absent.
    pub bound: Option<String>,
    pub lambda: u32,
    pub t_bits: Option<u32>,
    /// Decimal string; overrides `t_bits`.
    pub plaintext_modulus: Option<String>,
    pub eps_inv_bits: Option<u32>,
    /// Decimal string; `1` when absent.
    pub b_m: Option<String>,
    #[serde(default = "default_true")]
    pub enforce_security: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    scheme: String,
    model_size: usize,
    seed: SeedValue,
    #[serde(default = "default_p")]
    fixed_point_bits: u32,
    #[serde(default = "default_rounds")]
    rounds: u32,
    #[serde(default)]
    parallel_clients: bool,
    primes: Option<Vec<u64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeedValue {
    Int(u64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    transcript: Option<PathBuf>,
    timings: Option<PathBuf>,
    aggregate: Option<PathBuf>,
}

const DEFAULT_EPS_INV_BITS: u32 = 20;

/// `log2 t` leaving one spare bit above `2·L·2^p`.
fn headroom_t_bits(p: u32, parties: usize) -> u32 {
    p + usize::BITS - (parties.max(1) - 1).leading_zeros() + 2
}

fn default_sigma() -> f64 {
    3.2
}
fn default_true() -> bool {
    true
}
fn default_p() -> u32 {
    16
}
fn default_rounds() -> u32 {
    1
}

impl RawPlan {
    pub(crate) fn into_inputs(self, security: &BTreeMap<String, u64>, default_t_bits: Option<u32>) -> Result<PlanInputs> {
        let t_bits = match (self.t_bits.or(default_t_bits), &self.plaintext_modulus) {
            (Some(t), _) => t,
            (None, Some(_)) => 0,
            (None, None) => return Err(Error::Config("[plan] needs t_bits or plaintext_modulus".into())),
        };
        let eps_inv_bits = self.eps_inv_bits.unwrap_or(DEFAULT_EPS_INV_BITS);
        let mut inputs = PlanInputs::new(self.n, self.parties, self.sigma, self.lambda, t_bits, eps_inv_bits);
        if let Some(b) = self.bound {
            inputs.bound = parse_decimal(&b)?;
        }
        if let Some(t) = self.plaintext_modulus {
            let t: BigUint = t
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("plaintext_modulus {t:?} is not an integer")))?;
            inputs.plaintext_modulus = Some(t);
        }
        if let Some(b_m) = self.b_m {
            inputs.b_m = parse_decimal(&b_m)?;
        }
        inputs.enforce_security = self.enforce_security;
        inputs.security = security_table(security)?;
        Ok(inputs)
    }
}

pub(crate) fn security_table(overrides: &BTreeMap<String, u64>) -> Result<SecurityTable> {
    let mut table = SecurityTable::default();
    for (k, &v) in overrides {
        let n: usize = k
            .parse()
            .map_err(|_| Error::Config(format!("security key {k:?} is not a ring degree")))?;
        table = table.with_override(n, v);
    }
    Ok(table)
}

impl RawConfig {
    fn into_config(self) -> Result<ProtocolConfig> {
        let scheme: Scheme = self.protocol.scheme.parse()?;
        let t_bits = headroom_t_bits(self.protocol.fixed_point_bits, self.plan.parties);
        let mut plan = self.plan.into_inputs(&self.security, Some(t_bits))?;
        plan.scheme = Some(scheme);
        let seed = match self.protocol.seed {
            SeedValue::Int(v) => RootSeed::from_u64(v),
            SeedValue::Text(s) => RootSeed::parse(&s)?,
        };
        let cfg = ProtocolConfig {
            plan,
            model_size: self.protocol.model_size,
            seed,
            fixed_point_bits: self.protocol.fixed_point_bits,
            rounds: self.protocol.rounds,
            parallel_clients: self.protocol.parallel_clients,
            primes: self.protocol.primes,
            output: OutputPaths {
                transcript: self.output.transcript,
                timings: self.output.timings,
                aggregate: self.output.aggregate,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses a planner-only config: a `[plan]` section with an optional
/// `scheme` and an optional `[security]` table.
pub fn plan_inputs_from_toml(text: &str) -> Result<PlanInputs> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct RawPlanFile {
        plan: RawPlan,
        scheme: Option<String>,
        #[serde(default)]
        security: BTreeMap<String, u64>,
    }
    let raw: RawPlanFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut inputs = raw.plan.into_inputs(&raw.security, None)?;
    inputs.scheme = raw.scheme.map(|s| s.parse()).transpose()?;
    inputs.validate()?;
    Ok(inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_decimal;

    const SAMPLE: &str = r#"
[plan]
n = 1024
parties = 2
lambda = 16
t_bits = 20
enforce_security = false

[protocol]
scheme = "mbfv"
model_size = 4096
seed = 7
fixed_point_bits = 12

[output]
transcript = "out/transcript.toml"

[security]
1024 = 60
"#;

    #[test]
    fn parses_sample() {
        let c = ProtocolConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(c.scheme(), Scheme::Bfv);
        assert_eq!(c.plan.bound, parse_decimal("19.2").unwrap());
        assert_eq!(c.chunks(), 4);
        assert_eq!(c.seed, RootSeed::from_u64(7));
        assert_eq!(c.rounds, 1);
        assert_eq!(c.plan.security.max_bits(1024), Some(60));
        assert_eq!(c.output.transcript.as_deref(), Some(Path::new("out/transcript.toml")));
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = SAMPLE.replace("rounds", "x").replace("seed = 7", "seed = 7\ncolour = 1");
        assert!(matches!(ProtocolConfig::from_toml(&bad), Err(Error::Config(_))));
        let bad = SAMPLE.replace("[plan]", "[plan]\nsigmaa = 3.0");
        assert!(ProtocolConfig::from_toml(&bad).is_err());
        let bad = SAMPLE.replace("\"mbfv\"", "\"bgv\"");
        assert!(ProtocolConfig::from_toml(&bad).unwrap_err().is_config_rejection());
    }

    #[test]
    fn default_t_has_headroom() {
        let c = ProtocolConfig::new(Scheme::Bfv, 1024, 8, 16, 10, 1);
        // 2·8·2^16 = 2^20 < 2^21
        assert_eq!(c.plan.t_bits, 21);
        let c = ProtocolConfig::new(Scheme::Bfv, 1024, 1, 16, 10, 1);
        assert_eq!(c.plan.t_bits, 18);
    }

    #[test]
    fn omitted_plaintext_fields_take_defaults() {
        let text = "[plan]\nn = 1024\nparties = 8\nlambda = 16\n[protocol]\nscheme = \"ckks\"\nmodel_size = 4\nseed = 1\n";
        let c = ProtocolConfig::from_toml(text).unwrap();
        assert_eq!((c.plan.t_bits, c.plan.eps_inv_bits), (21, 20));
        assert!(plan_inputs_from_toml("[plan]\nn = 1024\nparties = 8\nlambda = 16\n").is_err());
    }

    #[test]
    fn plan_file() {
        let i = plan_inputs_from_toml("scheme = \"ckks\"\n[plan]\nn = 16384\nparties = 16\nlambda = 128\nt_bits = 45\neps_inv_bits = 45\n").unwrap();
        assert_eq!(i.scheme, Some(Scheme::Ckks));
        assert!(i.enforce_security);
    }
}
