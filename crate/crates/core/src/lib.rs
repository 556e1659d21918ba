pub mod exec;
pub mod graph;
pub mod nl;
pub mod querygen;
