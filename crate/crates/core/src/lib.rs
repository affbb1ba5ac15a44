//! Core library for checking autonomous-vehicle simulation traces against
//! road-safety rules: trace model and file formats, frame conversion,
//! clearance metrics, rule evaluation, simulation fidelity and synthetic
//! trace generation.

pub mod clearance;
pub mod fidelity;
pub mod geo;
pub mod model;
pub mod parse;
pub mod rules;
pub mod synth;
