//! Multi-agent multi-armed bandits on communication graphs.
//!
//! Clients pull arms, receive rewards from client-specific distributions,
//! and exchange observations with graph neighbors. Regret is measured
//! against the arm with the best mean averaged over all clients.

pub mod analysis;
pub mod cli;
pub mod env;
pub mod graph;
pub mod policy;
pub mod rng;
pub mod sim;
