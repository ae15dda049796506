//! Exact arithmetic for divided-power period rings over `Z/p^n`.

pub mod exactnum;
pub mod linalg;
pub mod dpring;
pub mod witt;
pub mod lattice;
pub mod periods;
pub mod galois;
pub mod cli;
