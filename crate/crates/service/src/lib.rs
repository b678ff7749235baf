//! Orchestration, command line and HTTP query surfaces over `vacobs-core`.

pub mod config;
pub mod data;
pub mod query;
pub mod pipeline;
pub mod synth;
pub mod api;
pub mod mock_geocoder;
