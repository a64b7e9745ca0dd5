//! Special functions and small dense linear algebra used by every other module.

mod erfc;
mod factorial;
mod jacobi;
mod poisson;

pub use erfc::{erfc, gaussian_upper_tail};
pub use factorial::{ln_factorial, LogFactorialTable};
pub use jacobi::{
    eigenvalues_symmetric, eigenvalues_symmetric_with, JacobiOptions, Spectrum, SymmetricMatrix,
};
pub use poisson::{
    log_add_exp, log_poisson_pmf, poisson_lower_cutoff, poisson_lower_tail, poisson_tail_cutoff,
    poisson_upper_tail, PoissonWindow,
};
