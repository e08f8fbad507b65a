//! Deterministic simulator of twin-assisted slice management for multicast
//! short-video delivery.
//!
//! A population of viewers walks around a small cellular deployment watching
//! short videos that are multicast to groups. Every viewer has a *user
//! digital twin* (UDT): a data pool fed by sensed samples and playback
//! events, plus estimators that turn the pool into swipe-behaviour and
//! preference models. An *infrastructure twin* (IDT) aggregates those models
//! into per-group demand and emulates candidate configurations ahead of
//! time, and a *slice twin* (SDT) decides, once per management window, how
//! viewers are grouped and how much bandwidth and edge compute each group is
//! reserved. Inside the window a small-timescale scheduler re-splits the
//! pooled reservation slot by slot.
//!
//! Everything is pure and seeded: one master seed fans out into independent
//! substreams ([`rng`]), so every run — including the twins' internal
//! emulations — replays bit for bit.
//!
//! The crate ships a library (this API), a command-line runner, and a guide
//! built from the same sources as the doc-tests.

pub mod domain;
pub mod error;
pub mod guide;
pub mod harness;
pub mod idt;
pub mod kpi;
pub mod physnet;
pub mod rng;
pub mod sdt;
pub mod udt;

pub use error::{Error, Result};
