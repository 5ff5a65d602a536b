//! The simulated aggregation protocol: L clients and one aggregator on an
//! in-process bus, plus configs, transcripts, timing sweeps and the
//! self-test.

pub mod bench;
pub mod config;
pub mod protocol;
pub mod selftest;
pub mod transcript;

pub use config::{plan_inputs_from_toml, OutputPaths, ProtocolConfig};
pub use protocol::{
    aggregator_eval_step, client_input_step, oracle_average, output_step, run_protocol, run_setup,
    synthetic_update, Aggregator, ClientState, RunOutput, SetupOutput,
};
pub use selftest::{selftest, CheckOutcome, SelftestReport, Status};
pub use transcript::{Bus, MessageKind, MessageRecord, Party, TimingReport, Transcript};
