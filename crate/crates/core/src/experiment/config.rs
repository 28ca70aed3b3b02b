use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::OracleMode;
use crate::scalar::{format_rational, Rational};
use crate::sdp::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::xor3::PRNG_TAG;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Primal/dual residual target of the SDP solver.
    pub solver: f64,
    /// Slack allowed on floating-point identity checks (exact ones use none).
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solver: DEFAULT_TOL,
            identity: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    #[serde(with = "crate::scalar::serde_rational")]
    pub beta: Rational,
    pub multiplier: usize,
    pub d_scale: usize,
    pub degree_factor: usize,
    pub tau: f64,
    pub round: usize,
    pub seed: u64,
    pub prng: String,
    pub oracle: OracleMode,
    pub planted: bool,
    pub tolerances: Tolerances,
    pub max_iter: usize,
}

impl ExperimentConfig {
    pub fn new(
        n: usize,
        beta: Rational,
        multiplier: usize,
        tau: f64,
        round: usize,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            n,
            beta,
            multiplier,
            d_scale: 10,
            degree_factor: crate::gadgets::DEFAULT_DEGREE_FACTOR,
            tau,
            round,
            seed,
            prng: PRNG_TAG.into(),
            oracle: OracleMode::Exact,
            planted: true,
            tolerances: Tolerances::default(),
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    /// `m = β·n`, which must be an integer.
    pub fn m(&self) -> Result<usize> {
        let m = &self.beta * Rational::from_integer(self.n.into());
        if !m.is_integer() {
            return Err(Error::InvalidParameter(format!(
                "β·n = {} is not an integer",
                format_rational(&m)
            )));
        }
        num_traits::ToPrimitive::to_usize(&m.to_integer())
            .ok_or_else(|| Error::InvalidParameter("m does not fit".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.m()?;
        if self.prng != PRNG_TAG {
            return Err(Error::InvalidParameter(format!(
                "prng {:?} is not supported (only {PRNG_TAG})",
                self.prng
            )));
        }
        if !(self.tolerances.solver > 0.0 && self.tolerances.identity > 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        if !(self.tau > 0.0 && self.tau < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "τ = {} outside (0, 1/2)",
                self.tau
            )));
        }
        if self.round == 0 || self.multiplier == 0 || self.degree_factor == 0 {
            return Err(Error::InvalidParameter(
                "r, M and c must be positive".into(),
            ));
        }
        Ok(())
    }
}
