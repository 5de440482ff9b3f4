//! Local minimizers over beta-space.

mod bfgs;
mod implicit_filtering;
mod report;

pub use bfgs::{bfgs_minimize, central_gradient, BfgsOptions};
pub use implicit_filtering::{default_scales, implicit_filtering, IfOptions, ImplicitFiltering};
pub use report::{OptReport, TracePoint};

pub(crate) use report::Tracker;
