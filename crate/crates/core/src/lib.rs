//! Degree theory toolkit: explicit sphere maps of prescribed degree,
//! numerical degrees and vector-field indices with integer results, and
//! Morse index formula checks on balls and shells.

pub mod degree;
pub mod fields;
pub mod mesh;
pub mod constructors;
pub mod index;
pub mod morse;
