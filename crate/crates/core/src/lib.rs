//! Satisfiability-preserving reductions between equational constraint
//! languages over modular lattices, matrix rings, relation algebras and
//! relational databases, with finite-structure checkers and search oracles.

pub mod database;
pub mod ffmat;
pub mod formulas;
pub mod groups;
pub mod lattice;
pub mod matring;
pub mod oracle;
pub mod reductions;
pub mod relalg;
