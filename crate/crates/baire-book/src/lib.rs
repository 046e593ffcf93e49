//! Compiles every code snippet in the guide under `book/` as a doc-test.
//!
//! Each module's documentation is the corresponding chapter file, included
//! verbatim, so `cargo test -p baire-book --doc` fails whenever the book
//! drifts from the library. Console transcripts in the book are fenced as
//! `console` and are not executed here; they are covered by the CLI's own
//! integration tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/sequences-and-points.md")]
pub mod sequences_and_points {}

#[doc = include_str!("../../../book/src/brouwer-operations.md")]
pub mod brouwer_operations {}

#[doc = include_str!("../../../book/src/covers-and-formal-maps.md")]
pub mod covers_and_formal_maps {}

#[doc = include_str!("../../../book/src/fans-and-moduli.md")]
pub mod fans_and_moduli {}

#[doc = include_str!("../../../book/src/generators-and-oracles.md")]
pub mod generators_and_oracles {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
