pub mod certify;
pub mod cli;
pub mod grid;
pub mod kernels;
mod quadrature;
pub mod specfun;
pub mod theta;
