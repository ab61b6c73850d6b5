pub mod cli;
pub mod einstein;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod structures;
pub mod tensor;
pub mod verify;
