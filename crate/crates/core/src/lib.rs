//! Relaxed upper-confidence-bound (RUCB) sample selection for training loops.
//!
//! The crate is organised around the training loop it drives:
//!
//! * [`bandit`] scores samples and implements the Uniform, OHEM, UCB and RUCB policies.
//! * [`reward_model`] is a small softmax pixel classifier whose per-slice
//!   cross-entropy is the reward, plus the Dice metric.
//! * [`testbed`] generates scripted-reward and toy segmentation corpora with
//!   injected annotation errors.
//! * [`scheduler`] runs the initial uniform phase and the bootstrapping phases.
//! * [`config`], [`report`], [`dataset`] and [`artifacts`] cover configuration,
//!   tables and on-disk outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod bandit;
pub mod config;
pub mod dataset;
pub mod error;
pub mod report;
pub mod reward_model;
pub mod rng;
pub mod scheduler;
pub mod testbed;

pub use error::{Error, Result};
