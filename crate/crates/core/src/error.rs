use thiserror::Error;

use crate::wave_curves::WaveCurve;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state outside the admissible domain: {0}")]
    Domain(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("quadrature grid does not cover the perturbation: {0}")]
    Grid(String),
    #[error("continuation failed at s={s:.6e}: {reason}")]
    Continuation {
        s: f64,
        reason: String,
        partial: Box<WaveCurve>,
    },
    #[error("curve left the domain at s={s:.6e}")]
    DomainExit { s: f64, partial: Box<WaveCurve> },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("inadmissible discontinuity: {0}")]
    Admissibility(String),
    #[error("no crossing of the level surface was found on any ray")]
    SurfaceEmpty,
    #[error("profile assertion failed at s={s:.6e}: {what}")]
    Assertion { s: f64, what: String },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("bracket does not separate verdicts: {0}")]
    Bracket(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("CFL condition violated: {0}")]
    Cfl(String),
    #[error("waves reached the domain boundary at t={0:.6e}")]
    BoundaryReached(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
