use thiserror::Error;

use crate::bounds::BoundsError;
use crate::model::ModelError;
use crate::numerics::{BracketError, IntegrationError, QuadError};
use crate::pdesim::PdeError;
use crate::profile::ProfileError;
use crate::shooting::ShootError;

/// Any failure raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Shoot(#[from] ShootError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Bracket(#[from] BracketError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
