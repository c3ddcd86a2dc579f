use alloc::string::String;

/// Errors raised by geometric and numerical operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported derivative order {order} (maximum is {max})")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("missing capability: {0}")]
    Capability(&'static str),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = core::result::Result<T, Error>;
