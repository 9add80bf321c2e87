pub mod games;
pub mod graph;
pub mod net;
pub mod quantum;
pub mod soundness;
pub mod strategies;
