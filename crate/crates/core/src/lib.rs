pub mod bench;
pub mod cli;
pub mod error;
pub mod extrapolate;
pub mod grid;
pub mod linalg;
pub mod refine1d;
pub mod refine2d;
pub mod solver1d;
pub mod solver2d;
