//! Tensor files and run configuration text.
//!
//! # Tensor file layout
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `TLSMTNS1` |
//! | 24    | `n1`, `n2`, `n3` as little-endian `u64` |
//! | 1     | dtype tag, `1` = `f64` |
//! | 8·n   | entries in canonical layout, little-endian `f64` |
//!
//! # Config text
//!
//! One `key = value` per line, `#` starts a comment. Every key is optional and
//! falls back to [`RunConfig::default`]. `event = t0, dip_inline,
//! dip_crossline, amplitude` may repeat; if no event is given the default
//! three-event layout for the configured dims is used.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Result, TlsmError};
use crate::seisgen::{self, EventSpec, NoiseSpec};
use crate::solver::{SolverConfig, SolverMode};
use crate::tensor::Tensor3;

pub const MAGIC: [u8; 8] = *b"TLSMTNS1";
pub const DTYPE_F64: u8 = 1;
pub const HEADER_LEN: usize = 8 + 24 + 1;

/// Byte length of a tensor file with the given dims.
pub fn file_len(dims: [usize; 3]) -> usize {
    HEADER_LEN + 8 * dims.iter().product::<usize>()
}

pub fn encode_tensor(t: &Tensor3) -> Vec<u8> {
    let mut buf = Vec::with_capacity(file_len(t.dims()));
    buf.extend_from_slice(&MAGIC);
    for d in t.dims() {
        buf.extend_from_slice(&(d as u64).to_le_bytes());
    }
    buf.push(DTYPE_F64);
    for v in t.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_tensor(bytes: &[u8]) -> Result<Tensor3> {
    if bytes.len() < HEADER_LEN {
        return Err(TlsmError::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[..8] != MAGIC {
        return Err(TlsmError::Format("bad magic".into()));
    }
    let mut dims = [0usize; 3];
    for (m, d) in dims.iter_mut().enumerate() {
        let raw = u64::from_le_bytes(bytes[8 + 8 * m..16 + 8 * m].try_into().unwrap());
        *d = usize::try_from(raw).map_err(|_| TlsmError::Format(format!("dimension {raw} too large")))?;
    }
    if bytes[32] != DTYPE_F64 {
        return Err(TlsmError::Format(format!("unsupported dtype tag {}", bytes[32])));
    }
    let expected = dims
        .iter()
        .try_fold(8usize, |acc, &d| acc.checked_mul(d))
        .and_then(|n| n.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(TlsmError::Format(format!(
            "payload of {} bytes does not match dims {dims:?}",
            bytes.len() - HEADER_LEN
        )));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Tensor3::from_vec(dims, data)
}

fn with_path(path: &Path) -> impl FnOnce(std::io::Error) -> TlsmError + '_ {
    move |source| TlsmError::File { path: path.to_path_buf(), source }
}

pub fn write_tensor(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let path = path.as_ref();
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&encode_tensor(t)))
        .map_err(with_path(path))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(with_path(path))?;
    decode_tensor(&bytes)
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(with_path(path))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(with_path(path))
}

/// Synthetic volume geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub dims: [usize; 3],
    pub dt: f64,
    pub peak_freq: f64,
    pub events: Vec<EventSpec>,
}

impl Default for DataConfig {
    fn default() -> Self {
        let dims = seisgen::DEFAULT_DIMS;
        DataConfig {
            dims,
            dt: seisgen::DEFAULT_DT,
            peak_freq: seisgen::DEFAULT_PEAK_FREQ,
            events: seisgen::default_events(dims, seisgen::DEFAULT_DT),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub noise: NoiseSpec,
    pub data: DataConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            solver: SolverConfig::default(),
            noise: NoiseSpec::new(0.2, 0.02, 7, seisgen::DEFAULT_DIMS[2]),
            data: DataConfig::default(),
        }
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| TlsmError::Config {
        line,
        message: format!("cannot parse `{value}` for `{key}`"),
    })
}

fn parse_list<T: std::str::FromStr, const N: usize>(line: usize, key: &str, value: &str) -> Result<[T; N]> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(TlsmError::Config {
            line,
            message: format!("`{key}` takes {N} comma-separated values, got {}", parts.len()),
        });
    }
    let parsed = parts
        .iter()
        .map(|p| parse_value(line, key, p))
        .collect::<Result<Vec<T>>>()?;
    Ok(parsed.try_into().unwrap_or_else(|_| unreachable!()))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut events = Vec::new();
        let mut decay_given = false;
        let mut events_given = false;
        let mut seen = std::collections::HashSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| TlsmError::Config {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key != "event" && !seen.insert(key.to_string()) {
                return Err(TlsmError::Config { line, message: format!("duplicate key `{key}`") });
            }
            let s = &mut cfg.solver;
            let n = &mut cfg.noise;
            match key {
                "a" => s.a = parse_value(line, key, value)?,
                "b" => s.b = parse_value(line, key, value)?,
                "c" => s.c = parse_value(line, key, value)?,
                "tau" => s.tau = parse_value(line, key, value)?,
                "lambda1" => s.lambda1 = parse_value(line, key, value)?,
                "lambda2" => s.lambda2 = parse_value(line, key, value)?,
                "max_iters" => s.max_iters = parse_value(line, key, value)?,
                "epsilon" => s.epsilon = parse_value(line, key, value)?,
                "rel_tol" => s.rel_tol = parse_value(line, key, value)?,
                "mode" => {
                    s.mode = value.parse::<SolverMode>().map_err(|e| TlsmError::Config {
                        line,
                        message: e.to_string(),
                    })?
                }
                "footprint_amplitude" => n.footprint_amplitude = parse_value(line, key, value)?,
                "gaussian_sigma" => n.gaussian_sigma = parse_value(line, key, value)?,
                "seed" => n.seed = parse_value(line, key, value)?,
                "footprint_period" => n.footprint_period = parse_value(line, key, value)?,
                "footprint_decay" => {
                    n.footprint_decay = parse_value(line, key, value)?;
                    decay_given = true;
                }
                "dims" => cfg.data.dims = parse_list(line, key, value)?,
                "dt" => cfg.data.dt = parse_value(line, key, value)?,
                "peak_freq" => cfg.data.peak_freq = parse_value(line, key, value)?,
                "event" => {
                    let [intercept_time, dip_inline, dip_crossline, amplitude] = parse_list(line, key, value)?;
                    events.push(EventSpec { intercept_time, dip_inline, dip_crossline, amplitude });
                    events_given = true;
                }
                _ => return Err(TlsmError::Config { line, message: format!("unknown key `{key}`") }),
            }
        }

        let dims = cfg.data.dims;
        if dims.contains(&0) {
            return Err(TlsmError::Config { line: 0, message: format!("dims must be positive, got {dims:?}") });
        }
        if !decay_given {
            cfg.noise.footprint_decay = dims[2] as f64 / 4.0;
        }
        cfg.data.events = if events_given { events } else { seisgen::default_events(dims, cfg.data.dt) };
        cfg.solver
            .validate()
            .and_then(|_| cfg.noise.validate())
            .map_err(|e| TlsmError::Config { line: 0, message: e.to_string() })?;
        Ok(cfg)
    }

    /// Text that [`RunConfig::parse`] maps back to an identical value.
    pub fn render(&self) -> String {
        let s = &self.solver;
        let n = &self.noise;
        let d = &self.data;
        let mut out = String::new();
        let _ = writeln!(out, "# solver");
        let _ = writeln!(out, "mode = {}", s.mode);
        for (k, v) in [
            ("a", s.a),
            ("b", s.b),
            ("c", s.c),
            ("tau", s.tau),
            ("lambda1", s.lambda1),
            ("lambda2", s.lambda2),
            ("epsilon", s.epsilon),
            ("rel_tol", s.rel_tol),
        ] {
            let _ = writeln!(out, "{k} = {v:?}");
        }
        let _ = writeln!(out, "max_iters = {}", s.max_iters);
        let _ = writeln!(out, "\n# noise");
        let _ = writeln!(out, "footprint_amplitude = {:?}", n.footprint_amplitude);
        let _ = writeln!(out, "gaussian_sigma = {:?}", n.gaussian_sigma);
        let _ = writeln!(out, "seed = {}", n.seed);
        let _ = writeln!(out, "footprint_period = {}", n.footprint_period);
        let _ = writeln!(out, "footprint_decay = {:?}", n.footprint_decay);
        let _ = writeln!(out, "\n# data");
        let _ = writeln!(out, "dims = {}, {}, {}", d.dims[0], d.dims[1], d.dims[2]);
        let _ = writeln!(out, "dt = {:?}", d.dt);
        let _ = writeln!(out, "peak_freq = {:?}", d.peak_freq);
        for e in &d.events {
            let _ = writeln!(
                out,
                "event = {:?}, {:?}, {:?}, {:?}",
                e.intercept_time, e.dip_inline, e.dip_crossline, e.amplitude
            );
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }
}
