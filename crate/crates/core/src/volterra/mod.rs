//! Solvers for the linear and Riccati Volterra integral equations behind
//! the strategy coefficients.

mod convolution;
mod linear;
mod riccati;

pub use convolution::{convolve, ConvolutionWeights};
pub use linear::{solve_linear_vie, LinearVieProblem};
pub(crate) use linear::solve_with_weights;
pub use riccati::{
    riccati_bound_curve, riccati_bounds, solve_riccati_volterra, PsiSolution, RiccatiCoefficients,
    SolverConfig,
};
