//! Text formats for signals (SIG2D) and spectra (SPEC2D).
//!
//! Both are UTF-8 with `# key=value` header lines followed by one data
//! line per grid entry in row-major order. Floating-point values are
//! printed with shortest round-trip precision, so write-then-read
//! reproduces values bit-exactly.

use std::collections::HashMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::data::{Provenance, SignalGrid2D, SignalLabel, Spectrum2D};
use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, TimeGrid};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

struct Header {
    entries: HashMap<String, (usize, String)>, // key -> (line number, value)
    data_start: usize,
}

fn parse_header(text: &str) -> Header {
    let mut entries = HashMap::new();
    let mut data_start = 0;
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = rest.split_once('=') {
                entries.insert(key.trim().to_string(), (idx + 1, value.trim().to_string()));
            }
            data_start = idx + 1;
        } else if trimmed.is_empty() && entries.is_empty() {
            data_start = idx + 1;
        } else {
            break;
        }
    }
    Header {
        entries,
        data_start,
    }
}

impl Header {
    fn require(&self, key: &str) -> Result<&str> {
        self.entries
            .get(key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing header key `{key}`"),
            })
    }

    fn require_f64(&self, key: &str) -> Result<f64> {
        let (line, raw) = self.entries.get(key).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing header key `{key}`"),
        })?;
        raw.parse().map_err(|_| Error::Parse {
            line: *line,
            message: format!("invalid number for `{key}`: {raw}"),
        })
    }

    fn require_usize(&self, key: &str) -> Result<usize> {
        let (line, raw) = self.entries.get(key).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing header key `{key}`"),
        })?;
        raw.parse().map_err(|_| Error::Parse {
            line: *line,
            message: format!("invalid integer for `{key}`: {raw}"),
        })
    }

    fn optional_i64(&self, key: &str, default: i64) -> Result<i64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some((line, raw)) => raw.parse().map_err(|_| Error::Parse {
                line: *line,
                message: format!("invalid integer for `{key}`: {raw}"),
            }),
        }
    }
}

fn parse_data_rows(
    text: &str,
    data_start: usize,
    n_rows: usize,
    n_cols: usize,
) -> Result<Array2<C64>> {
    let mut values = Array2::from_elem((n_rows, n_cols), C64::new(0.0, 0.0));
    let mut expected = 0usize;
    let total = n_rows * n_cols;
    for (idx, line) in text.lines().enumerate().skip(data_start) {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if expected >= total {
            return Err(Error::Parse {
                line: line_no,
                message: format!("extra data row beyond the declared {total} entries"),
            });
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 4 fields (row col re im), got {}", fields.len()),
            });
        }
        let row: usize = fields[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid row index: {}", fields[0]),
        })?;
        let col: usize = fields[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid column index: {}", fields[1]),
        })?;
        let (want_row, want_col) = (expected / n_cols, expected % n_cols);
        if row != want_row || col != want_col {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "out-of-order entry ({row}, {col}); expected ({want_row}, {want_col}) \
                     in row-major order"
                ),
            });
        }
        let re: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid real part: {}", fields[2]),
        })?;
        let im: f64 = fields[3].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid imaginary part: {}", fields[3]),
        })?;
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("non-finite value in row {want_row}"),
            });
        }
        values[(row, col)] = C64::new(re, im);
        expected += 1;
    }
    if expected != total {
        let row = expected / n_cols;
        return Err(Error::Parse {
            line: text.lines().count(),
            message: format!("file ends in row {row}: got {expected} of {total} declared entries"),
        });
    }
    Ok(values)
}

// ---- SIG2D -----------------------------------------------------------------

pub fn read_signal_grid(path: impl AsRef<Path>) -> Result<SignalGrid2D> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_signal_grid(&text)
}

pub fn parse_signal_grid(text: &str) -> Result<SignalGrid2D> {
    let header = parse_header(text);
    let delta_tau = header.require_f64("delta_tau_fs")?;
    let delta_t = header.require_f64("delta_t_fs")?;
    let population_time = header.require_f64("population_time_fs")?;
    let n_tau = header.require_usize("n_tau")?;
    let n_t = header.require_usize("n_t")?;
    let label_raw = header.require("label")?;
    let label = SignalLabel::parse(label_raw).ok_or_else(|| Error::Parse {
        line: 1,
        message: format!("label must be `sum` or `diff`, got `{label_raw}`"),
    })?;
    let tau_origin = header.optional_i64("tau_origin_index", 0)?;
    let t_origin = header.optional_i64("t_origin_index", 0)?;

    let tau_grid =
        TimeGrid::with_origin(delta_tau, n_tau, tau_origin).map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
    let t_grid = TimeGrid::with_origin(delta_t, n_t, t_origin).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let values = parse_data_rows(text, header.data_start, n_tau, n_t)?;
    SignalGrid2D::new(tau_grid, t_grid, population_time, label, values)
}

pub fn write_signal_grid(signal: &SignalGrid2D, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&format!("# delta_tau_fs={}\n", signal.tau_grid.delta_fs()));
    out.push_str(&format!("# delta_t_fs={}\n", signal.t_grid.delta_fs()));
    out.push_str(&format!(
        "# tau_origin_index={}\n",
        signal.tau_grid.origin_index()
    ));
    out.push_str(&format!(
        "# t_origin_index={}\n",
        signal.t_grid.origin_index()
    ));
    out.push_str(&format!(
        "# population_time_fs={}\n",
        signal.population_time_fs
    ));
    out.push_str(&format!("# n_tau={}\n", signal.tau_grid.count()));
    out.push_str(&format!("# n_t={}\n", signal.t_grid.count()));
    out.push_str(&format!("# label={}\n", signal.label.as_str()));
    for ((a, b), v) in signal.values().indexed_iter() {
        out.push_str(&format!("{a} {b} {} {}\n", v.re, v.im));
    }
    write_atomic(path, &out)
}

// ---- SPEC2D ----------------------------------------------------------------

pub fn read_spectrum(path: impl AsRef<Path>) -> Result<Spectrum2D> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_spectrum(&text)
}

pub fn parse_spectrum(text: &str) -> Result<Spectrum2D> {
    let header = parse_header(text);
    let n_tau = header.require_usize("n_omega_tau")?;
    let tau_min = header.require_f64("omega_tau_min")?;
    let tau_spacing = header.require_f64("omega_tau_spacing")?;
    let n_t = header.require_usize("n_omega_t")?;
    let t_min = header.require_f64("omega_t_min")?;
    let t_spacing = header.require_f64("omega_t_spacing")?;
    let population_time = header.require_f64("population_time_fs")?;
    let prov_raw = header.require("provenance")?;
    let provenance = Provenance::parse(prov_raw).ok_or_else(|| Error::Parse {
        line: 1,
        message: format!("provenance must be `ft` or `cs`, got `{prov_raw}`"),
    })?;

    let grid_err = |e: Error| Error::Parse {
        line: 1,
        message: e.to_string(),
    };
    let omega_tau_grid = FrequencyGrid::new(tau_min, tau_spacing, n_tau).map_err(grid_err)?;
    let omega_t_grid = FrequencyGrid::new(t_min, t_spacing, n_t).map_err(grid_err)?;
    let values = parse_data_rows(text, header.data_start, n_tau, n_t)?;
    Spectrum2D::new(
        omega_tau_grid,
        omega_t_grid,
        population_time,
        provenance,
        values,
    )
}

pub fn write_spectrum(spectrum: &Spectrum2D, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&format!(
        "# n_omega_tau={}\n",
        spectrum.omega_tau_grid.count()
    ));
    out.push_str(&format!(
        "# omega_tau_min={}\n",
        spectrum.omega_tau_grid.min()
    ));
    out.push_str(&format!(
        "# omega_tau_spacing={}\n",
        spectrum.omega_tau_grid.spacing()
    ));
    out.push_str(&format!("# n_omega_t={}\n", spectrum.omega_t_grid.count()));
    out.push_str(&format!("# omega_t_min={}\n", spectrum.omega_t_grid.min()));
    out.push_str(&format!(
        "# omega_t_spacing={}\n",
        spectrum.omega_t_grid.spacing()
    ));
    out.push_str(&format!(
        "# population_time_fs={}\n",
        spectrum.population_time_fs
    ));
    out.push_str(&format!("# provenance={}\n", spectrum.provenance.as_str()));
    for ((a, b), v) in spectrum.values().indexed_iter() {
        out.push_str(&format!("{a} {b} {} {}\n", v.re, v.im));
    }
    write_atomic(path, &out)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| io_err(path, e))?;
    Ok(())
}
