use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::decide::DecideError;
use crate::forest::ForestError;
use crate::machines::MachineError;
use crate::series::SeriesError;
use crate::workspace::LoadError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Load(#[from] LoadError),
}
