//! Adaptive random convolutional network coding for multicast networks.
//!
//! Nodes combine what they receive with random local kernels whose length
//! grows one coefficient per time step until every downstream sink can
//! decode; sinks acknowledge upstream and edges stop growing once all
//! the sinks behind them are satisfied.

pub mod analysis;
pub mod baseline;
pub mod engine;
pub mod gf;
pub mod polyalg;
pub mod topology;
