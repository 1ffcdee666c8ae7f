//! Modules over (Z/p^m)[C_{p^n}]: exact linear algebra over Z/p^m, concrete
//! finite modules with a cyclic generator action, endomorphism algebras and
//! indecomposability tests, and the parametrised family X_{a,d,m}.

pub mod error;
pub mod groupring;
pub mod indecomp;
pub mod linalg;
pub mod module;
pub mod residue;
pub mod verify;
pub mod xfamily;

pub use error::{Error, Result};
