//! Secure multicast MIMO transceiver design for coordinated base stations.
//!
//! Several base stations send one common stream set to a group of users while
//! eavesdroppers listen. The design minimizes the users' summed MSE subject to
//! a per-BS power budget and a floor on every eavesdropper's MSE, optionally
//! robust to stochastic or norm-bounded channel-estimation errors, and shapes
//! artificial noise towards directions that hurt users least.
//!
//! Modules, bottom up: [`numerics`], [`channel`], [`mse`], [`design`],
//! [`clustering`], [`simkit`].

pub mod channel;
pub mod clustering;
pub mod design;
pub mod error;
pub mod mse;
pub mod numerics;
pub mod simkit;

pub use error::{Error, Result};
