//! Secret-key capacity bounds for a BPSK satellite broadcast observed by two
//! legitimate ground stations and an eavesdropper through independent AWGN
//! channels, after one-bit sign quantization.
//!
//! The crate covers the channel model and its crossover probabilities, the
//! conditional mutual information bound `I(X_q;Y_q|Z_q)`, its `q^-2` decay
//! and scaled limit, sweeps and Monte Carlo cross-checks, and exact or
//! simulated evaluation of finite public-discussion protocols.

pub mod asymptotics;
pub mod capacity;
pub mod channel;
pub mod error;
pub mod mi;
pub mod optimize;
pub mod protocol;
pub mod special;
pub mod stats;
pub mod verify;

pub use channel::{CrossoverPair, QuantizedTriple, SatelliteParams, Sign};
pub use error::{Error, Result};
pub use mi::{sk_upper_bound, JointTriple, MIValue};
pub use optimize::Interval;
pub use protocol::{ProtocolMetrics, ProtocolSpec};
