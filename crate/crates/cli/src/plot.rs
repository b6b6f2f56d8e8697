//! Plot-ready long-format CSV.

use std::fs::File;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::format::fmt_sig9;

/// Writes `index, series_name, value` rows, one block per series in the
/// order given. `index_name` labels the first column, e.g. `minute`.
pub fn emit_plot_data(path: &Path, index_name: &str, series: &[(&str, &[f64])]) -> Result<()> {
    if series.is_empty() {
        return Err(CliError::Config("no series to plot".into()));
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record([index_name, "series_name", "value"])?;
    for (name, values) in series {
        for (k, v) in values.iter().enumerate() {
            w.write_record([k.to_string(), name.to_string(), fmt_sig9(*v)])?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plot.csv");
        let a = vec![4090.0; 1440];
        let b = vec![4000.0; 1440];
        emit_plot_data(&path, "minute", &[("beta_estimate", &a), ("beta_fixed", &b)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 1440);
        assert_eq!(lines[0], "minute,series_name,value");
        assert_eq!(lines[1], "0,beta_estimate,4090");
        assert_eq!(lines[1441], "0,beta_fixed,4000");
        assert!(emit_plot_data(&path, "minute", &[]).is_err());
    }
}
