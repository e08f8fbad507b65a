//! The user guide, compiled.
//!
//! Each module here mirrors one chapter of the book under `book/src/`, so
//! every code sample in the guide builds and runs with `cargo test`. The
//! rendered version comes from `mdbook build book`; this module keeps the
//! two in lockstep.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/scenario.md")]
pub mod scenario {}

#[doc = include_str!("../../../book/src/radio.md")]
pub mod radio {}

#[doc = include_str!("../../../book/src/viewers.md")]
pub mod viewers {}

#[doc = include_str!("../../../book/src/twins.md")]
pub mod twins {}

#[doc = include_str!("../../../book/src/grouping.md")]
pub mod grouping {}

#[doc = include_str!("../../../book/src/reservation.md")]
pub mod reservation {}

#[doc = include_str!("../../../book/src/scheduling.md")]
pub mod scheduling {}

#[doc = include_str!("../../../book/src/value.md")]
pub mod value {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
