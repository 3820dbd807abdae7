pub mod besselpair;
pub mod calculus;
pub mod catalog;
pub mod cli;
pub mod expr;
pub mod feller;
pub mod grid;
pub mod hardy;
pub mod par;
pub mod quad;
pub mod spectral;
