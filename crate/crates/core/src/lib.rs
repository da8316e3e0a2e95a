//! Co-channel satellite–terrestrial network simulator and sum-rate optimizer.
//!
//! The pipeline is: build a [`scene::Scene`] (box city, base stations, LEO
//! orbits, UE routes), trace it into a [`channel::ChannelTensor`], then choose
//! UE associations with either [`greedy::greedy_assign`] or the successive
//! convex approximation solver [`sca::sca_solve`]. [`expcli`] wires the pieces
//! together behind a JSON configuration and writes CSV/PGM artifacts.

pub mod antenna;
pub mod channel;
pub mod consts;
pub mod error;
pub mod expcli;
pub mod greedy;
pub mod sca;
pub mod scene;
pub mod sysmodel;

pub use error::{Error, Result};
