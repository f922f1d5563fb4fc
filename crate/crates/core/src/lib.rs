//! Finite algebra-valued models of paraconsistent set theory.

pub mod algebra;
pub mod axioms;
pub mod cli;
pub mod fidel;
pub mod kernel;
pub mod lemmas;
pub mod search;
pub mod files;
pub mod syntax;
pub mod theta;
pub mod universe;
pub mod valuation;
