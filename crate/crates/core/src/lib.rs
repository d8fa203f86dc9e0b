//! Analysis toolkit for the CHSH_q family of two-player games over finite
//! fields.
//!
//! * [`field`]: arithmetic in F_q, traces, additive characters, subfields.
//! * [`game`]: win counting, best responses, exact and heuristic classical values.
//! * [`incidence`]: strategies as point-line configurations, explicit
//!   high-incidence constructions and random projective regularization.
//! * [`boxes`]: exact error channels of regular noisy boxes, their
//!   composition and the distributed game.
//! * [`info`]: entropy accounting, Hadamard-subcode experiments and the
//!   message-reduction simulation.
//! * [`fourier`]: the bilinear character-sum bound and its tightness.

pub mod boxes;
pub mod error;
pub mod field;
pub mod fourier;
pub mod game;
pub mod incidence;
pub mod info;
pub mod rational;

pub use boxes::{ErrorDist, GameKind, MonteCarloEstimate, RegularBox, Regularized};
pub use error::{Error, ErrorKind, Result};
pub use field::{additive_character, Character, Element, Field, FieldSpec};
pub use fourier::VectorFamily;
pub use game::{GameValue, SearchOutcome, Solved, Strategy};
pub use incidence::{Config, Line, ProjLine, ProjPoint, ProjTransform, RegularizationStats};
pub use info::{HadamardTask, JointDist};
