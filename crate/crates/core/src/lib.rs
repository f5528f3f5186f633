//! Layered verification of components equipped with multi-faceted
//! assume-guarantee contracts.

pub mod checker;
pub mod contract;
pub mod dsl;
pub mod explore;
pub mod lexer;
pub mod lts;
pub mod prop;
pub mod system;
pub mod value;
pub mod verifier;
