//! Task-sequence replay for learning-from-observation.
//!
//! A demonstration is recorded as a robot-agnostic [`taskir::TaskSequence`].
//! Hand-centric [`skills`] turn each task into hand targets, and the
//! [`executor`] carries the hand with whatever arm the [`kinematics`] model
//! describes, using [`laban`] poses to keep the posture close to the
//! demonstrator's.

pub mod bundled;
pub mod cli;
pub mod executor;
pub mod kinematics;
pub mod laban;
pub mod pose;
pub mod skills;
pub mod taskir;
pub mod taxonomy;
