//! Q-derivative calculus over finite field towers, Q-multiplicity and folded
//! Reed-Muller codes, and their list decoders.

pub mod codes;
pub mod decode;
pub mod error;
pub mod gf;
pub mod linsys;
pub mod poly;
pub mod qcalc;
pub mod qmult;
pub mod selftest;

pub use error::{Error, Result};
pub use gf::{FieldTower, FqElem, KElem};
pub use poly::{Degree, ExpVec, MultiPoly, UniPoly};
