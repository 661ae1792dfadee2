#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod bounds;
pub mod cli;
pub mod construct;
pub mod error;
pub mod io;
pub mod linalg;
pub mod module;
pub mod optimize;
pub mod rng;
pub mod symtensor;
