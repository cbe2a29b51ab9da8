#![no_std]

extern crate alloc;

pub mod base;
pub mod bridge;
pub mod error;
pub mod formula;
pub mod hilbert;
pub mod kripke;
pub mod lemmas;
pub mod relation;
pub mod semantics;

pub use base::{Base, BaseRule, RuleUniverse};
pub use error::{Error, Result};
pub use formula::{Atom, Formula};
pub use relation::{ExtensionalRelation, GeneratedRelation, ModalLogic, Relation};
