//! Rigidity and global rigidity of graphs.

pub mod algebra;
pub mod builders;
pub mod certify;
pub mod corpus;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod packing;
pub mod rigidity;
pub mod sparsity;
