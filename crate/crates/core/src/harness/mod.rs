//! Experiment drivers, configuration, initial conditions and file I/O.

mod config;
mod experiments;
mod initial;
mod io;
pub mod verify;

pub use config::{resolve_out_dir, ExperimentConfig, ExperimentKind, InitialCondition, ParticleSpec};
pub use experiments::{
    run_energy_audit, run_experiment, run_free, run_galilean, run_k_sweep, run_taylor_green, run_transport_check,
    taylor_green_error, uniform_steps, well_prepared_state, RunOutcome, SweepMember,
};
pub use initial::{compressive_pulse, initial_condition, taylor_green, taylor_green_exact};
pub use io::{
    file_checksum, read_field, read_snapshot, write_field, write_manifest, write_snapshot, write_timeseries,
    FieldData, FieldKind, RunManifest, SnapshotHeader, MANIFEST_NAME,
};
