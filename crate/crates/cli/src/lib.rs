//! Command implementations behind the `hgf` binary.
//!
//! Every command returns its textual output instead of printing, so the same
//! code paths can be driven from tests.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use hgf_core::output::{format_value, trajectory_csv};
use hgf_core::{simulate, HgfError, Network, NetworkConfig, SimulationSpec};
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments, unreadable files, malformed configs or input series.
    #[error("{0}")]
    Usage(String),
    /// The model is invalid or the run failed numerically.
    #[error("{0}")]
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(_) => 1,
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        CliError::Usage(format!("{}: {e}", path.display()))
    }
}

impl From<HgfError> for CliError {
    fn from(e: HgfError) -> Self {
        match e {
            HgfError::Parse(_)
            | HgfError::InvalidTime(_)
            | HgfError::MissingInput(_)
            | HgfError::UnknownInput(_)
            | HgfError::NoTrials => CliError::Usage(e.to_string()),
            _ => CliError::Model(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn read_config(path: &Path) -> Result<NetworkConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    NetworkConfig::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Writes `contents` next to `path` first and renames it into place, so a
/// failed write never leaves a truncated file behind.
fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

pub struct ValidateOutcome {
    pub valid: bool,
    pub report: String,
}

pub fn cmd_validate(config: &Path) -> Result<ValidateOutcome> {
    let cfg = read_config(config)?;
    let report = hgf_core::validate(&cfg);
    let mut text = report.to_string();
    if report.is_empty() {
        text.push_str(&format!(
            "ok: {} nodes, {} edges\n",
            cfg.nodes.len(),
            cfg.edges.len()
        ));
    }
    Ok(ValidateOutcome {
        valid: report.is_empty(),
        report: text,
    })
}

pub fn cmd_simulate(config: &Path, trials: usize, seed: u64, out: &Path) -> Result<()> {
    if trials == 0 {
        return Err(HgfError::NoTrials.into());
    }
    let cfg = read_config(config)?;
    let truth = simulate(&SimulationSpec::new(cfg, trials, seed))?;
    write_atomically(out, &truth.to_csv())
}

/// Observations parsed from an input CSV, aligned with a network's inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSeries {
    pub times: Vec<f64>,
    /// `rows[trial][k]` is the value of the network's `k`-th input node.
    pub rows: Vec<Vec<f64>>,
}

/// Reads an input series for `input_ids`.
///
/// Recognised columns are `trial` (ignored), `t` (defaults to 1), one per
/// input id, and `true_*` ground-truth columns (ignored). Anything else is
/// an error naming the column.
pub fn read_input_series(text: &str, input_ids: &[&str]) -> Result<InputSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::Usage(format!("input header: {e}")))?
        .clone();

    let mut t_col = None;
    let mut input_cols = vec![None; input_ids.len()];
    for (c, name) in header.iter().enumerate() {
        if let Some(k) = input_ids.iter().position(|id| *id == name) {
            if input_cols[k].replace(c).is_some() {
                return Err(CliError::Usage(format!("input column `{name}` appears twice")));
            }
        } else if name == "t" {
            t_col = Some(c);
        } else if name == "trial" || name.starts_with("true_") {
        } else {
            return Err(CliError::Usage(format!(
                "unexpected input column `{name}`; expected `trial`, `t` or one of [{}]",
                input_ids.join(", ")
            )));
        }
    }
    let input_cols: Vec<usize> = input_cols
        .iter()
        .zip(input_ids)
        .map(|(c, id)| c.ok_or_else(|| CliError::Usage(format!("input column `{id}` is missing"))))
        .collect::<Result<_>>()?;

    let mut series = InputSeries {
        times: Vec::new(),
        rows: Vec::new(),
    };
    for (r, record) in reader.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| CliError::Usage(format!("input line {line}: {e}")))?;
        let field = |c: usize| -> Result<f64> {
            let raw = record.get(c).unwrap_or("");
            raw.parse::<f64>().map_err(|_| {
                CliError::Usage(format!(
                    "input line {line}, column `{}`: `{raw}` is not a number",
                    &header[c]
                ))
            })
        };
        let t = match t_col {
            Some(c) => field(c)?,
            None => 1.0,
        };
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Usage(format!(
                "input line {line}: time increment must be finite and > 0, got {t}"
            )));
        }
        series.times.push(t);
        series.rows.push(input_cols.iter().map(|&c| field(c)).collect::<Result<_>>()?);
    }
    Ok(series)
}

/// Result of filtering one config.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRun {
    pub csv: String,
    pub total_surprise: f64,
}

pub fn filter_series(config: &NetworkConfig, input: &str) -> Result<FilterRun> {
    let mut net = Network::build(config)?;
    let ids = net.input_ids();
    let series = read_input_series(input, &ids)?;
    let mut records = Vec::with_capacity(series.rows.len());
    for (row, &t) in series.rows.iter().zip(&series.times) {
        records.push(net.run_trial(row, t)?);
        log::debug!("trial {} done", net.trial());
    }
    let total_surprise = records.iter().map(|r| r.surprise()).sum();
    Ok(FilterRun {
        csv: trajectory_csv(&net, &records),
        total_surprise,
    })
}

/// Formats with 12 significant digits.
pub fn format_significant(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format_value(v);
    }
    let exponent = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // Rounding may carry into a new leading digit.
        let digits = s.chars().filter(char::is_ascii_digit).collect::<String>();
        if digits.trim_start_matches('0').len() > 12 && decimals > 0 {
            let decimals = decimals - 1;
            return format!("{v:.decimals$}");
        }
        s
    } else {
        format!("{v:.11e}")
    }
}

pub struct FilterOptions<'a> {
    pub configs: &'a [PathBuf],
    pub input: &'a Path,
    pub out: &'a Path,
    pub jobs: usize,
}

/// Filters the input series through every config. With one config `out` is
/// the output file; with several it is a directory receiving `<stem>.csv`
/// per config. Returns `(config, total surprise)` per config. Nothing is
/// written unless every run succeeds.
pub fn cmd_filter(opts: &FilterOptions<'_>) -> Result<Vec<(PathBuf, f64)>> {
    if opts.configs.is_empty() {
        return Err(CliError::Usage("no config given".into()));
    }
    let input = fs::read_to_string(opts.input).map_err(|e| CliError::io(opts.input, e))?;
    let targets: Vec<PathBuf> = if opts.configs.len() == 1 {
        vec![opts.out.to_path_buf()]
    } else {
        if !opts.out.is_dir() {
            return Err(CliError::Usage(format!(
                "{}: with several configs --out must be an existing directory",
                opts.out.display()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        opts.configs
            .iter()
            .map(|c| {
                let stem = c.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                if !seen.insert(stem.clone()) {
                    return Err(CliError::Usage(format!("two configs share the file stem `{stem}`")));
                }
                Ok(opts.out.join(format!("{stem}.csv")))
            })
            .collect::<Result<_>>()?
    };

    let run = |path: &PathBuf| -> Result<FilterRun> {
        let cfg = read_config(path)?;
        filter_series(&cfg, &input).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            CliError::Model(m) => CliError::Model(format!("{}: {m}", path.display())),
        })
    };
    let runs: Vec<FilterRun> = if opts.jobs > 1 && opts.configs.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
        pool.install(|| opts.configs.par_iter().map(run).collect::<Result<_>>())?
    } else {
        opts.configs.iter().map(run).collect::<Result<_>>()?
    };

    for (target, r) in targets.iter().zip(&runs) {
        write_atomically(target, &r.csv)?;
    }
    Ok(opts
        .configs
        .iter()
        .cloned()
        .zip(runs.iter().map(|r| r.total_surprise))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_significant(221.807_097_779_182_6), "221.807097779");
        assert_eq!(format_significant(std::f64::consts::LN_2), "0.693147180560");
        assert_eq!(format_significant(9.999_999_999_999_9), "10.0000000000");
        assert_eq!(format_significant(-3.0), "-3.00000000000");
        assert_eq!(format_significant(1.5e20), "1.50000000000e20");
    }

    #[test]
    fn input_series_defaults_and_errors() {
        let s = read_input_series("u\n0.5\n1.5\n", &["u"]).unwrap();
        assert_eq!(s.times, vec![1.0, 1.0]);
        assert_eq!(s.rows, vec![vec![0.5], vec![1.5]]);

        let s = read_input_series("trial,t,b,a,true_x\n1,0.5,2,1,9\n", &["a", "b"]).unwrap();
        assert_eq!(s.rows, vec![vec![1.0, 2.0]]);
        assert_eq!(s.times, vec![0.5]);

        let err = read_input_series("u,v\n1,2\n", &["u"]).unwrap_err();
        assert!(err.to_string().contains("`v`") && err.exit_code() == 2);
        let err = read_input_series("t\n1\n", &["u"]).unwrap_err();
        assert!(err.to_string().contains("`u`"));
        let err = read_input_series("t,u\n0,1\n", &["u"]).unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let err = read_input_series("u\nabc\n", &["u"]).unwrap_err();
        assert!(err.to_string().contains("abc"));
    }
}
