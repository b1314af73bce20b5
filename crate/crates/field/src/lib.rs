//! Particle-field coupling: one closed digester per fluid particle, driven
//! by a sequence of particle snapshots and stepped in parallel.

pub mod bench;
pub mod engine;
pub mod field;
pub mod generate;
pub mod presets;
pub mod snapshot;

pub use engine::{partition, Engine, Partition};
pub use field::{init_field, FieldConfig, FieldError, FieldState, SyncPolicy};
pub use snapshot::{Particle, ParticleSnapshot, SnapshotError};
