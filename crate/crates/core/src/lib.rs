//! Fault-tolerant distance labels and shortest-path counting labels for
//! directed graphs with small balanced separators.

pub mod archive;
pub mod cli;
pub mod codec;
pub mod count;
pub mod countlabel;
pub mod decomp;
pub mod faultlabel;
pub mod gen;
pub mod graph;
pub mod oracle;

pub use count::{CountMode, CountValue};
pub use graph::{Distance, EdgeRecord, Graph};
