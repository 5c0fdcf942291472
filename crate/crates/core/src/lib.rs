pub mod changegen;
pub mod decompose;
pub mod error;
mod fold;
pub mod io;
pub mod linalg;
pub mod multfunc;
pub mod perron;
pub mod subgroup;
pub mod system;
pub mod transport;
pub mod words;

pub use error::{Error, Result};
pub use words::{Alphabet, FiniteSubtree, Letter, Word};
