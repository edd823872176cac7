pub mod cli;
pub mod expr;
pub mod hamiltonian;
pub mod numerics;
pub mod parser;
