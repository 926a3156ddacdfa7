//! Monte Carlo simulation of Levy increments and the auxiliary laws used by
//! the diagnostics.

mod batch;
mod circle;
mod increment;
pub mod io;
mod sampler;
mod small_time;
mod walk;

pub use batch::SampleBatch;
pub use circle::{circle_rows, sample_circle};
pub use increment::{cutoff_for_budget, sample_increment, small_jump_approx, Simulator};
pub use sampler::{sample_radial_jump, Cutoff, JumpSampler, RadialTable, TABLE_KNOTS};
pub use small_time::{asmussen_small_time, SmallTimeRow};
pub use walk::{embed_random_walk, AtomicStep, GaussianStep, StepLaw, ZeroStep};
