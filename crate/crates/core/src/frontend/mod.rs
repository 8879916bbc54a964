//! Problem files, instance generators, and the solve/compare pipeline used by
//! the command-line tool.

mod generate;
mod pipeline;
mod problem;

pub use generate::{gen_qcqp, gen_quartic, wrap_blocks, Generator, GeneratorKind};
pub use pipeline::{
    psd_cap_from_env, run_compare, run_solve, Candidate, CertificateFile, CertificateSummary, CompareRow, DenseRun,
    LowerOrder, ModelRun, Outcome, Report, Route, SdpSize, SolveConfig, Timings, DEFAULT_PSD_CAP, PSD_CAP_ENV,
};
pub use problem::{ProblemFile, FORMAT_VERSION};
