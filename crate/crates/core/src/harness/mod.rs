//! Configuration, seed sweeps, CSV/SVG artifacts and canned experiments.

mod config;
mod experiments;
mod output;
mod run;

pub use config::{AgentKind, Overrides, RunConfig};
pub use experiments::{
    bandit_demo, fig1, gradcheck_sweep, solve, table1, write_fig1, GradCheckLine, SolveReport, Table1, TableCell,
    TABLE1_AGENTS, TABLE1_ENVS,
};
pub use output::{
    line_plot_svg, mean_std, summarize, write_log_csv, write_summary_csv, Series, SummaryRow, LOG_HEADER,
    SUMMARY_HEADER,
};
pub use run::{run, train_seed, RunArtifacts};
