//! File formats, experiment harness and command-line front end for
//! [`scalechain_core`].

// `!(x > 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod files;
pub mod harness;
pub mod trace_csv;

pub use error::{Error, Result};
