//! Shipped test cases.

pub mod config;
pub mod flat_plate;
pub mod pulse;
pub mod run;

pub use flat_plate::{build_flat_plate_case, pressure_coefficient, FreeStream};
pub use pulse::{build_pulse_case, pulse_initial_condition, pulse_reference_solution, shock_formation_time, Method, WaveReference};
