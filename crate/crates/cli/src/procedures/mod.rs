pub mod hs;
pub mod sequence;
pub mod single;
