//! Run configuration: defaults, `key=value` config files, flag overrides.
//!
//! Precedence is defaults < config file < command-line flags; the caller
//! applies the file first and then lays explicit flags on top.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use flexsim_core::{Dataflow, Error, Result, DEFAULT_TRACE_CAP, FLEX_CLOCK_NS, STATIC_CLOCK_NS};

/// What a run executes: one forced dataflow, or per-layer selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Static(Dataflow),
    Flex,
}

impl RunMode {
    /// Lowercase token used in CSV totals rows and CLI flags.
    pub fn token(self) -> &'static str {
        match self {
            RunMode::Flex => "flex",
            RunMode::Static(df) => df.token(),
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("flex") {
            return Ok(RunMode::Flex);
        }
        s.parse::<Dataflow>().map(RunMode::Static).map_err(|_| {
            Error::Validation {
                subject: "run mode".into(),
                message: format!("expected one of is/os/ws/flex, got {s:?}"),
            }
        })
    }
}

/// Fully resolved settings for the `run` and `sweep` commands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub topology: Option<PathBuf>,
    pub rows: usize,
    pub cols: usize,
    pub dataflow: RunMode,
    pub clock_ns_static: f64,
    pub clock_ns_flex: f64,
    pub verify: bool,
    pub out: Option<PathBuf>,
    pub trace_cap: u64,
    pub sizes: Option<Vec<(usize, usize)>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            topology: None,
            rows: 32,
            cols: 32,
            dataflow: RunMode::Flex,
            clock_ns_static: STATIC_CLOCK_NS,
            clock_ns_flex: FLEX_CLOCK_NS,
            verify: false,
            out: None,
            trace_cap: DEFAULT_TRACE_CAP,
            sizes: None,
        }
    }
}

impl RunConfig {
    /// Apply a `key=value` config file (blank lines and `#` comments are
    /// skipped). Recognized keys: topology, rows, cols, dataflow, clock_ns,
    /// flex_clock_ns, verify, out, trace_cap, sizes.
    pub fn apply_config_file(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected key=value, got {trimmed:?}"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Parse {
                line,
                message: format!("{what}: {value:?}"),
            };
            match key {
                "topology" => self.topology = Some(PathBuf::from(value)),
                "rows" => {
                    self.rows = value.parse().map_err(|_| bad("rows is not an integer"))?
                }
                "cols" => {
                    self.cols = value.parse().map_err(|_| bad("cols is not an integer"))?
                }
                "dataflow" => {
                    self.dataflow = value
                        .parse()
                        .map_err(|_| bad("dataflow must be is, os, ws, or flex"))?
                }
                "clock_ns" => {
                    self.clock_ns_static =
                        value.parse().map_err(|_| bad("clock_ns is not a number"))?
                }
                "flex_clock_ns" => {
                    self.clock_ns_flex = value
                        .parse()
                        .map_err(|_| bad("flex_clock_ns is not a number"))?
                }
                "verify" => {
                    self.verify = match value {
                        "true" | "1" => true,
                        "false" | "0" => false,
                        _ => return Err(bad("verify must be true/false/1/0")),
                    }
                }
                "out" => self.out = Some(PathBuf::from(value)),
                "trace_cap" => {
                    self.trace_cap = value
                        .parse()
                        .map_err(|_| bad("trace_cap is not an integer"))?
                }
                "sizes" => self.sizes = Some(parse_sizes(value)?),
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        Ok(())
    }
}

/// Parse a size list like `"8x8,32x32"`; a bare `"16"` means `16x16`.
pub fn parse_sizes(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut sizes = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        let (rows, cols) = match item.split_once(['x', 'X']) {
            Some((r, c)) => (r.trim(), c.trim()),
            None => (item, item),
        };
        let parse = |s: &str| {
            s.parse::<usize>()
                .ok()
                .filter(|v| *v > 0)
                .ok_or_else(|| Error::Validation {
                    subject: "sizes".into(),
                    message: format!("bad size entry {item:?} (want N or RxC)"),
                })
        };
        sizes.push((parse(rows)?, parse(cols)?));
    }
    Ok(sizes)
}
