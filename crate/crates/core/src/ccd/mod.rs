//! Conditional clade distributions: CCD0, CCD1 and CCD2 graphs with
//! probability, MAP and sampling queries.

mod format;
mod graph;
mod queries;

pub use format::{read_ccd, write_ccd};
pub(crate) use format::{context_from_str, context_to_str};
pub use graph::{CcdGraph, CladeRecord, Context, Model, Removed, SplitId, SplitRecord, VertexId};
