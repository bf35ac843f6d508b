//! Scenario files, built-in presets, runs and their output files.

mod config;
mod emit;
mod presets;
mod run;

pub use config::{
    parse_config, AgentEntry, AnalysisSection, ChainSection, Coeffs, GridSection, ModelRef,
    OutputSection, PlateauSpec, RunPlan, ScenarioConfig, Segment, SimSection, Variant,
    SCHEMA_VERSION,
};
pub use emit::{emit_scenario, emit_traces, report_text, run_dir, summary_text, trace_header};
pub use presets::{preset, preset_text, PRESET_NAMES};
pub use run::{
    run_plan, run_scenario, AgentSettling, BoundaryEntry, DcEntry, DecompositionEntry, NormTable,
    Parameters, PlateauEntry, Provenance, RunMode, RunOutcome, RunReport, ScenarioOutcome,
    StabilityEntry, TOOL_VERSION,
};
