use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function has a pole at {0}")]
    Pole(f64),
    #[error("quadrature did not reach tolerance: estimated error {estimate:e}, requested {requested:e} after {subdivisions} subdivisions")]
    ToleranceNotMet {
        estimate: f64,
        requested: f64,
        subdivisions: usize,
    },
    #[error("invalid bracket [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("root finder did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },
    #[error("found {count} stationary means, expected 1 or 3 (roots: {roots:?})")]
    InconsistentRootCount { count: usize, roots: Vec<f64> },
    #[error("no root of {what} in [{lo}, {hi}]")]
    NoRoot {
        what: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error("particle state blew up at t = {time} (|x| = {value:e}); reduce dt")]
    BlowUp { time: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
