//! Trace ingestion, run configuration and report emission.

mod config;
mod report;
mod synthetic;
mod traces;

pub use config::{RunConfig, Scenario};
pub use report::{
    compare, offline, offline_summary_json, round12, run_policy, sanitize, session_csv,
    summary_json, to_pretty, write_compare, write_offline, write_run, RunOutcome,
};
pub use synthetic::{
    generate_capacity, generate_synthetic, generate_viewports, CapacitySpec, SyntheticTraces,
    ViewportSpec,
};
pub use traces::{
    capacity_csv, detect_kind, parse_capacity, parse_viewport, read_capacity, read_viewport,
    resample_1hz, viewport_csv, TraceKind, CAPACITY_HEADER, VIEWPORT_HEADER,
};
