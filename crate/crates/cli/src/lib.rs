//! Library side of the `xxzq` command: CSV/JSON record I/O, oracle sampling
//! and the error type that maps onto process exit codes.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;
use xxzq_core::{discord_bruteforce, discord_closed, DBranch, SweepParam, SweepRecord, TwoSiteState};

/// Column order of every sweep CSV.
pub const CSV_HEADER: [&str; 18] = [
    "param", "value", "L", "J", "delta", "T", "dx", "dz", "concurrence", "eof", "qd", "d_branch", "f", "u",
    "s", "c", "chi", "m",
];

/// Closed-form vs brute-force discord agreement required by `oracle`.
pub const ORACLE_TOLERANCE: f64 = 1e-5;
/// Angular grid per axis of the brute-force discord search.
pub const ORACLE_GRID: usize = 64;
/// Window-halving refinements after the grid search.
pub const ORACLE_REFINEMENTS: usize = 40;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or malformed input; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// A numerical check or computation failed; exit code 1.
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV line {line}: {reason}")]
    Csv { line: u64, reason: String },
    #[error(transparent)]
    Core(#[from] xxzq_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Core(e) if is_numerical(e) => 1,
            CliError::Io { .. } => 1,
            _ => 2,
        }
    }
}

fn is_numerical(e: &xxzq_core::Error) -> bool {
    match e {
        xxzq_core::Error::Parameter { .. } => false,
        xxzq_core::Error::SweepPoint { source, .. } => is_numerical(source),
        _ => true,
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `records` with [`CSV_HEADER`]; floats carry 17 significant digits
/// so that reading the file back reproduces every value bit for bit.
pub fn write_csv<W: Write>(out: W, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Numerical(format!("writing CSV: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        let row = [
            r.param.map(|p| p.as_str().to_string()).unwrap_or_default(),
            num(r.value),
            r.sites.to_string(),
            num(r.coupling),
            num(r.delta),
            num(r.temperature),
            num(r.dx),
            num(r.dz),
            num(r.concurrence),
            num(r.eof),
            num(r.qd),
            r.d_branch.as_str().to_string(),
            num(r.f),
            num(r.u),
            num(r.s),
            num(r.c),
            num(r.chi),
            num(r.m),
        ];
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Numerical(format!("writing CSV: {e}")))?;
    Ok(())
}

/// Reads a sweep CSV written by [`write_csv`].
///
/// Rows must share one swept parameter and appear in strictly increasing
/// grid order; anything else is reported with its line number.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| CliError::Csv { line: 1, reason: e.to_string() })?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Csv {
            line: 1,
            reason: format!("expected header `{}`", CSV_HEADER.join(",")),
        });
    }
    let mut records: Vec<SweepRecord> = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| CliError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |col: &str, reason: String| CliError::Csv { line, reason: format!("column `{col}`: {reason}") };
        let f = |i: usize| -> Result<f64> {
            row[i].trim().parse::<f64>().map_err(|e| bad(CSV_HEADER[i], format!("`{}`: {e}", &row[i])))
        };
        let param = match row[0].trim() {
            "" => None,
            p => Some(p.parse::<SweepParam>().map_err(|e| bad("param", e.to_string()))?),
        };
        let rec = SweepRecord {
            param,
            value: f(1)?,
            sites: row[2].trim().parse().map_err(|e| bad("L", format!("`{}`: {e}", &row[2])))?,
            coupling: f(3)?,
            delta: f(4)?,
            temperature: f(5)?,
            dx: f(6)?,
            dz: f(7)?,
            concurrence: f(8)?,
            eof: f(9)?,
            qd: f(10)?,
            d_branch: row[11].trim().parse::<DBranch>().map_err(|e| bad("d_branch", e.to_string()))?,
            f: f(12)?,
            u: f(13)?,
            s: f(14)?,
            c: f(15)?,
            chi: f(16)?,
            m: f(17)?,
        };
        if let Some(prev) = records.last() {
            if rec.param != prev.param {
                return Err(bad("param", "all rows must sweep the same parameter".into()));
            }
            if rec.value.is_nan() || rec.value <= prev.value {
                return Err(bad("value", format!("row out of grid order ({} after {})", rec.value, prev.value)));
            }
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(CliError::Csv { line: 1, reason: "no data rows".into() });
    }
    Ok(records)
}

/// One state checked by the discord oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSample {
    pub dx: f64,
    pub dz: f64,
    pub closed: f64,
    pub bruteforce: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub samples: Vec<OracleSample>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub pass: bool,
}

/// `n` states drawn uniformly from the physical region `|dx| <= (1 - dz)/2`
/// by rejection from the bounding square.
pub fn sample_states(seed: u64, n: usize) -> Vec<TwoSiteState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let dx: f64 = rng.random_range(-1.0..=1.0);
        let dz: f64 = rng.random_range(-1.0..=1.0);
        if dx.abs() <= (1.0 - dz) / 2.0 {
            if let Ok(s) = TwoSiteState::new(dx, dz) {
                out.push(s);
            }
        }
    }
    out
}

/// Compares closed-form and brute-force discord on `states`.
pub fn run_oracle(states: &[TwoSiteState], seed: u64) -> OracleReport {
    let samples: Vec<OracleSample> = states
        .iter()
        .map(|s| {
            let closed = discord_closed(s).0;
            let bruteforce = discord_bruteforce(s, ORACLE_GRID, ORACLE_REFINEMENTS);
            OracleSample { dx: s.dx(), dz: s.dz(), closed, bruteforce, deviation: (closed - bruteforce).abs() }
        })
        .collect();
    let max_deviation = samples.iter().map(|s| s.deviation).fold(0.0, f64::max);
    OracleReport {
        samples,
        max_deviation,
        tolerance: ORACLE_TOLERANCE,
        seed,
        pass: max_deviation < ORACLE_TOLERANCE,
    }
}

/// Parses `DX,DZ` into a validated state.
pub fn parse_state(s: &str) -> Result<TwoSiteState> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [dx, dz] = parts.as_slice() else {
        return Err(CliError::Usage(format!("--state expects DX,DZ, got `{s}`")));
    };
    let p = |v: &str| v.parse::<f64>().map_err(|e| CliError::Usage(format!("--state: `{v}`: {e}")));
    TwoSiteState::new(p(dx)?, p(dz)?).map_err(|e| CliError::Usage(e.to_string()))
}
