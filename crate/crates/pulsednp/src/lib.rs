pub mod sequence;
pub mod spin;
pub mod trajectory;
