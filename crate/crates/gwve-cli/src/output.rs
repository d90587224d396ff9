//! Output plumbing: CSV/JSON writers over stdout or files, and the float
//! formatting used in every CSV cell.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::{map_io, CliError};

/// Shortest round-trip decimal for a CSV cell (switches to exponent
/// notation for extreme magnitudes, so cells stay short and exact).
pub fn cell(x: f64) -> String {
    format!("{x:?}")
}

/// Empty cell for absent values; fixed headers keep the schema stable.
pub fn opt_cell(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_default()
}

/// Opens `out` for writing, or stdout when absent.
pub fn open_sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| map_io(dir, e))?;
            }
            let f = std::fs::File::create(path).map_err(|e| map_io(path, e))?;
            Ok(Box::new(f))
        }
        None => Ok(Box::new(std::io::stdout())),
    }
}

/// CSV writer over [`open_sink`].
pub fn csv_sink(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    Ok(csv::Writer::from_writer(open_sink(out)?))
}

/// Converts a CSV failure, which at this point can only be IO.
pub fn map_csv(out: Option<&Path>, e: csv::Error) -> CliError {
    let shown = out.map(|p| p.display().to_string()).unwrap_or_else(|| "<stdout>".into());
    CliError::Validation(format!("{shown}: {e}"))
}

/// Serializes `value` as pretty JSON with a trailing newline.  Struct field
/// order is fixed by the type, so equal inputs give byte-identical output.
pub fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut sink = open_sink(out)?;
    let text = serde_json::to_string_pretty(value)
        .expect("report types serialize infallibly");
    writeln!(sink, "{text}").map_err(|e| match out {
        Some(p) => map_io(p, e),
        None => CliError::Validation(format!("<stdout>: {e}")),
    })
}
