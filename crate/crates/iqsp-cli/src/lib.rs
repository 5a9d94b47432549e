//! Library surface of the CLI crate: job specs, runners, exports, and the
//! weight-space disk cache. The `iqsp` binary is a thin wrapper over this.

pub mod jobs;
