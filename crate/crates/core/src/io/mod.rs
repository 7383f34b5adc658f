//! Spec files, run manifests and rendered output.

pub mod manifest;
pub mod render;
pub mod spec;
