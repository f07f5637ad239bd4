//! Finite multi-round public-discussion protocols over the quantized source,
//! with exact (enumeration) and Monte Carlo evaluation of reliability, key
//! uniformity and leakage to Eve.
//!
//! Bits follow the global convention `+w -> 0`, `-w -> 1`. Alice's local
//! randomness is an explicit finite coin distribution.

mod builtins;
mod exact;
mod mc;
mod metrics;
mod spec;
mod text;

pub use builtins::{
    advantage_search, broadcast_protocol, one_bit_protocol, repetition_disagreement,
    repetition_protocol, trivial_protocol, AdvantageRow, MAX_REPETITION_BLOCK, REPETITION_ABORT,
};
pub use exact::{evaluate_exact, evaluate_exact_with_view, EveView, MAX_EXACT_BLOCKLENGTH};
pub use mc::{evaluate_mc, evaluate_mc_with_view, MIN_PROTOCOL_SAMPLES};
pub use metrics::{MetricErrors, ProtocolMetrics};
pub use spec::{
    BuiltinFn, CoinDistribution, Input, MapExpr, Message, Party, PartyMap, ProtocolParts,
    ProtocolSpec, Round, View, MAX_BLOCKLENGTH,
};
pub use text::parse_protocol;
