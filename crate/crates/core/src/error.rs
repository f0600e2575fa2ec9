use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the requested quantity.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to reach its requested tolerance.
    #[error("numeric error: {message} (achieved error estimate {achieved:e})")]
    Numeric { message: String, achieved: f64 },

    /// A sign certificate found a grid point where the quadratic form is not negative.
    #[error("certificate failure at n = {n}, t_c = {t_c}: value {value:e} is not negative")]
    Certificate { n: u32, t_c: f64, value: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
