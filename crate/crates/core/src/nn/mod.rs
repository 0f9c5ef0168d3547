//! Dense tanh networks with first- and second-order gradients, RMSProp and
//! the inverse-time learning-rate schedule.

mod checkpoint;
mod gradcheck;
mod net;
mod optim;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use gradcheck::{gradient_check, relative_error, GradCheckReport};
pub use net::{Dense, DenseNet, ParamVector, PenaltyTape, Tape};
pub use optim::{lr_schedule, rmsprop_step, OptState};

/// Hidden width of the tabular preset networks.
pub const TABULAR_WIDTH: usize = 64;
/// Hidden width of the classic-control preset networks.
pub const CONTROL_WIDTH: usize = 128;
