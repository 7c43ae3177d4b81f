//! Doc-test shim for the guide: every chapter is included as module
//! documentation, so `cargo test` compiles and runs each of the book's
//! Rust snippets against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/popularity.md")]
pub mod popularity {}

#[doc = include_str!("../../../book/src/placement.md")]
pub mod placement {}

#[doc = include_str!("../../../book/src/rates-and-delay.md")]
pub mod rates_and_delay {}

#[doc = include_str!("../../../book/src/schemes.md")]
pub mod schemes {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/throughput.md")]
pub mod throughput {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
