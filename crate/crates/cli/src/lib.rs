//! Command-line front end for `rkdarboux`.

pub mod commands;
pub mod report;
pub mod verify;

pub use commands::{
    cmd_detect_rational, cmd_find_darboux, cmd_integrate, cmd_list_fixtures, cmd_list_tableaux, cmd_stability,
    load_spec, load_specs, resolve_tableau, CliError, DEFAULT_ESCAPE, CliResult, Format, IntegrateArgs, Outcome,
};
pub use report::{fmt17, ExperimentReport, Row, Verdict};
pub use verify::{cmd_verify, Suite, VerifyArgs};
