//! Command implementations behind the `mpkrylov` binary: single solves with
//! convergence histories, and the alpha/ordering sweep harness.

mod solve;
mod sweep;
mod table;

pub use solve::{
    exit_code, load_system, parse_alpha, parse_selection, read_history_plot_data, run_solve,
    write_history_plot_data, HistoryRecord, SolveOptions, SolveOutcome,
};
pub use sweep::{run_sweep, Orderings, SweepOutcome, SweepPlan, DEFAULT_ALPHAS};
pub use table::{argmin_set, render_csv, render_markdown, Count, SweepRow, TableHeader};
