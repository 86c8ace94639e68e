//! Tab-separated replicate pairs `(Frobenius, geodesic)` for plotting.

use std::io::Write;

use dendrotest_core::TestResult;

use crate::error::{DataError, Result};

pub const HEADER: &str = "kind\tindex\tfrobenius\tgeodesic";

/// One row per replicate in replicate order, then one `observed` row.
pub fn emit_scatter<W: Write>(result: &TestResult, mut out: W) -> Result<()> {
    let (Some(f), Some(g)) = (&result.frobenius, &result.geodesic) else {
        return Err(DataError::invalid("a scatter needs both the Frobenius and the geodesic metric"));
    };
    let io = |source| DataError::Io { path: "<scatter>".into(), source };
    writeln!(out, "{HEADER}").map_err(io)?;
    for (i, (x, y)) in f.replicates.iter().zip(&g.replicates).enumerate() {
        writeln!(out, "replicate\t{i}\t{x}\t{y}").map_err(io)?;
    }
    writeln!(out, "observed\t-\t{}\t{}", f.observed, g.observed).map_err(io)?;
    Ok(())
}
