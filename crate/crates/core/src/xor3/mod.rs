//! 3-XOR instances, seeded sampling, brute-force oracles and Lasserre solution checks.

mod instance;
mod rng;
mod solution;

pub use instance::{Xor3Instance, XorConstraint};
pub use rng::{derive_seed, SeededRng, PRNG_TAG};
pub use solution::{
    numeric_solution, perfect_solution_from_assignment, satisfied_polynomial, validate_solution,
    xor_program, GramData, PartialAssignment, XorLasserreSolution, XorValidation,
};
