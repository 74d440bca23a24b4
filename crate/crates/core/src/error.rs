use thiserror::Error;

/// Errors produced by mesh construction and search setup.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid facet: {0}")]
    InvalidFacet(String),

    #[error("invalid hexahedron: {0}")]
    InvalidHex(String),

    #[error("invalid hex complex: {0}")]
    InvalidComplex(String),

    #[error("invalid quad surface: {0}")]
    InvalidSurface(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
