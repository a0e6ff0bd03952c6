//! Benchmark harness and scaling-fit analysis behind the `mln` binary,
//! exposed as a library so integration tests can drive the full protocol
//! in-process.

pub mod bench;
pub mod fit;
