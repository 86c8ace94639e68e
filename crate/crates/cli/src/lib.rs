//! File formats, synthetic data, parallel execution and reports for the
//! `dendrotest` command.

pub mod error;
pub mod formats;
pub mod report;
pub mod run;
pub mod scatter;
pub mod synth;

pub use error::{DataError, Result};
pub use formats::{parse_cardsort, CardSortFile, DendrogramFile, MatrixFile};
pub use report::ReportFile;
pub use run::par_perm_test;
pub use scatter::emit_scatter;
pub use synth::{synth_generate, GroupSpec, SynthSpec};
