//! Viewpoint-enabled event-centric knowledge graphs.
//!
//! Facts hold everywhere; claims carry an attribution viewpoint and hold only
//! where the viewpoint hierarchy says so. The crate keeps every viewpoint's
//! claim set free of contradictions and serializes graphs with
//! singleton-property reification.

mod configfile;
pub mod hierarchy;
pub mod ids;
pub mod taxonomy;
pub mod store;
pub mod consistency;
pub mod fusion;
pub mod rdf_io;

#[cfg(test)]
mod testutil;
