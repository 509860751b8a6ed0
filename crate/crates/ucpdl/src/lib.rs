//! The UCPDL⁺ family of dynamic logics over finite relational structures.

pub mod ast;
pub mod eval;
pub mod games;
pub mod graph;
pub mod measures;
pub mod par;
pub mod satredux;
pub mod structure;
pub mod syntax;
pub mod translate;
pub mod treedecomp;
pub mod untc;
