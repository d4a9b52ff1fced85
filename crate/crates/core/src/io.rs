//! Tensor file formats and run manifests.
//!
//! Two formats, chosen by extension:
//!
//! * `.coo` — text. Header line `dims d1 d2 ... dM`, then one line per
//!   stored entry: `i1 i2 ... iM value` with zero-based indices. Omitted
//!   entries are zero; duplicate index lines accumulate by summation. Blank
//!   lines are ignored.
//! * `.dtb` — dense binary. Magic bytes `DTB1`, little-endian u32 mode
//!   count, one little-endian u64 per dimension, then row-major
//!   little-endian f64 values.
//!
//! Values must be finite and nonnegative in both formats. All writes go
//! through a temp file in the destination directory followed by a rename.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::losses::LossSpec;
use crate::tensor::DenseTensor;

pub const DTB_MAGIC: &[u8; 4] = b"DTB1";

/// Write bytes atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn check_value(v: f64, context: &str) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::MalformedFile(format!("non-finite value in {context}")));
    }
    if v < 0.0 {
        return Err(Error::MalformedFile(format!(
            "negative value {v} in {context}"
        )));
    }
    Ok(v)
}

fn read_coo(text: &str, path: &Path) -> Result<DenseTensor> {
    let ctx = path.display().to_string();
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedFile(format!("{ctx}: missing header line")))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("dims") {
        return Err(Error::MalformedFile(format!(
            "{ctx}: header must start with 'dims'"
        )));
    }
    let shape: Vec<usize> = fields
        .map(|f| {
            f.parse::<usize>().map_err(|_| {
                Error::MalformedFile(format!("{ctx}: bad dimension '{f}' in header"))
            })
        })
        .collect::<Result<_>>()?;
    if shape.is_empty() || shape.iter().any(|&d| d == 0) {
        return Err(Error::MalformedFile(format!(
            "{ctx}: header needs at least one positive dimension"
        )));
    }
    let mut tensor = DenseTensor::zeros(shape.clone())?;
    let strides = tensor.strides();
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != shape.len() + 1 {
            return Err(Error::MalformedFile(format!(
                "{ctx}: entry line '{line}' needs {} indices and a value",
                shape.len()
            )));
        }
        let mut flat = 0usize;
        for (axis, f) in fields[..shape.len()].iter().enumerate() {
            let idx: usize = f.parse().map_err(|_| {
                Error::MalformedFile(format!("{ctx}: bad index '{f}' in line '{line}'"))
            })?;
            if idx >= shape[axis] {
                return Err(Error::MalformedFile(format!(
                    "{ctx}: index {idx} out of range for mode {axis} (dim {})",
                    shape[axis]
                )));
            }
            flat += idx * strides[axis];
        }
        let value: f64 = fields[shape.len()].parse().map_err(|_| {
            Error::MalformedFile(format!(
                "{ctx}: bad value '{}' in line '{line}'",
                fields[shape.len()]
            ))
        })?;
        check_value(value, &ctx)?;
        // Duplicate coordinates accumulate.
        tensor.data_mut()[flat] += value;
    }
    Ok(tensor)
}

fn write_coo(t: &DenseTensor) -> Result<Vec<u8>> {
    if t.ndim() == 0 {
        return Err(Error::InvalidArgument(
            "COO format requires at least one mode".into(),
        ));
    }
    for &v in t.data() {
        check_value(v, "tensor being written")?;
    }
    let mut out = String::from("dims");
    for d in t.shape() {
        out.push(' ');
        out.push_str(&d.to_string());
    }
    out.push('\n');
    let strides = t.strides();
    for (flat, &v) in t.data().iter().enumerate() {
        if v != 0.0 {
            let mut rem = flat;
            for &s in &strides {
                out.push_str(&(rem / s).to_string());
                out.push(' ');
                rem %= s;
            }
            out.push_str(&v.to_string());
            out.push('\n');
        }
    }
    Ok(out.into_bytes())
}

fn read_dtb(bytes: &[u8], path: &Path) -> Result<DenseTensor> {
    let ctx = path.display().to_string();
    let need = |n: usize, at: usize| -> Result<()> {
        if bytes.len() < at + n {
            Err(Error::MalformedFile(format!("{ctx}: truncated file")))
        } else {
            Ok(())
        }
    };
    need(4, 0)?;
    if &bytes[..4] != DTB_MAGIC {
        return Err(Error::MalformedFile(format!("{ctx}: bad magic bytes")));
    }
    need(4, 4)?;
    let modes = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let mut offset = 8;
    let mut shape = Vec::with_capacity(modes);
    for _ in 0..modes {
        need(8, offset)?;
        let d = u64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap());
        shape.push(usize::try_from(d).map_err(|_| {
            Error::MalformedFile(format!("{ctx}: dimension {d} exceeds addressable size"))
        })?);
        offset += 8;
    }
    let count: usize = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::MalformedFile(format!("{ctx}: dimensions overflow")))?;
    let expected = offset + count * 8;
    if bytes.len() != expected {
        return Err(Error::MalformedFile(format!(
            "{ctx}: payload is {} bytes, header implies {}",
            bytes.len(),
            expected
        )));
    }
    let mut data = Vec::with_capacity(count);
    for i in 0..count {
        let at = offset + i * 8;
        let v = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        data.push(check_value(v, &ctx)?);
    }
    DenseTensor::new(shape, data)
}

fn write_dtb(t: &DenseTensor) -> Result<Vec<u8>> {
    for &v in t.data() {
        check_value(v, "tensor being written")?;
    }
    let mut out = Vec::with_capacity(8 + t.ndim() * 8 + t.len() * 8);
    out.extend_from_slice(DTB_MAGIC);
    out.extend_from_slice(&(t.ndim() as u32).to_le_bytes());
    for &d in t.shape() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

fn extension_of(path: &Path) -> Result<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "tensor path '{}' needs a .coo or .dtb extension",
                path.display()
            ))
        })
}

pub fn read_tensor(path: &Path) -> Result<DenseTensor> {
    match extension_of(path)?.as_str() {
        "coo" => {
            let text = fs::read_to_string(path)?;
            read_coo(&text, path)
        }
        "dtb" => {
            let bytes = fs::read(path)?;
            read_dtb(&bytes, path)
        }
        other => Err(Error::InvalidArgument(format!(
            "unsupported tensor file extension '.{other}'"
        ))),
    }
}

pub fn write_tensor(t: &DenseTensor, path: &Path) -> Result<()> {
    let bytes = match extension_of(path)?.as_str() {
        "coo" => write_coo(t)?,
        "dtb" => write_dtb(t)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unsupported tensor file extension '.{other}'"
            )))
        }
    };
    write_atomic(path, &bytes)
}

/// Everything needed to reproduce a fit bit-exactly, as a flat key=value
/// text file written next to the run's outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub model: String,
    /// Dimensions of the contracted indices, sorted by index character.
    pub ranks: Vec<(char, usize)>,
    pub loss_name: String,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub dispersion: Option<f64>,
    pub trials: Option<f64>,
    pub seed: u64,
    pub split_heldout: f64,
    pub split_validation: f64,
    pub max_iters: usize,
    pub min_rel_decrease: f64,
    pub val_patience: usize,
    pub epsilon: f64,
    pub optimizer: String,
    pub learning_rate: Option<f64>,
    pub data_path: String,
}

impl RunManifest {
    /// Reconstruct the loss this manifest describes.
    pub fn loss_spec(&self) -> Result<LossSpec> {
        match self.loss_name.as_str() {
            "ab" => {
                let alpha = self.alpha.ok_or_else(|| {
                    Error::MalformedFile("manifest loss 'ab' needs alpha".into())
                })?;
                let beta = self
                    .beta
                    .ok_or_else(|| Error::MalformedFile("manifest loss 'ab' needs beta".into()))?;
                LossSpec::alpha_beta(alpha, beta)
            }
            "negbin" => {
                let phi = self.dispersion.ok_or_else(|| {
                    Error::MalformedFile("manifest loss 'negbin' needs phi".into())
                })?;
                LossSpec::neg_binomial(phi)
            }
            "bernoulli" => Ok(LossSpec::bernoulli()),
            "binomial" => {
                let trials = self.trials.ok_or_else(|| {
                    Error::MalformedFile("manifest loss 'binomial' needs trials".into())
                })?;
                LossSpec::binomial(trials)
            }
            "js" => Ok(LossSpec::jensen_shannon()),
            other => Err(Error::MalformedFile(format!("unknown loss '{other}'"))),
        }
    }

    /// Serialize with a fixed key order so identical runs produce identical
    /// bytes.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("model={}\n", self.model));
        let ranks: Vec<String> = self
            .ranks
            .iter()
            .map(|(c, d)| format!("{c}={d}"))
            .collect();
        s.push_str(&format!("ranks={}\n", ranks.join(",")));
        s.push_str(&format!("loss={}\n", self.loss_name));
        if let Some(v) = self.alpha {
            s.push_str(&format!("alpha={v}\n"));
        }
        if let Some(v) = self.beta {
            s.push_str(&format!("beta={v}\n"));
        }
        if let Some(v) = self.dispersion {
            s.push_str(&format!("phi={v}\n"));
        }
        if let Some(v) = self.trials {
            s.push_str(&format!("trials={v}\n"));
        }
        s.push_str(&format!("seed={}\n", self.seed));
        s.push_str(&format!("split_heldout={}\n", self.split_heldout));
        s.push_str(&format!("split_validation={}\n", self.split_validation));
        s.push_str(&format!("max_iters={}\n", self.max_iters));
        s.push_str(&format!("min_rel_decrease={}\n", self.min_rel_decrease));
        s.push_str(&format!("val_patience={}\n", self.val_patience));
        s.push_str(&format!("epsilon={}\n", self.epsilon));
        s.push_str(&format!("optimizer={}\n", self.optimizer));
        if let Some(v) = self.learning_rate {
            s.push_str(&format!("learning_rate={v}\n"));
        }
        s.push_str(&format!("data={}\n", self.data_path));
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut get = std::collections::BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::MalformedFile(format!("manifest line '{line}' is not key=value"))
            })?;
            get.insert(k.to_string(), v.to_string());
        }
        let req = |key: &str| -> Result<String> {
            get.get(key)
                .cloned()
                .ok_or_else(|| Error::MalformedFile(format!("manifest missing '{key}'")))
        };
        let parse_f64 = |key: &str, v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::MalformedFile(format!("manifest '{key}' = '{v}' is not a number")))
        };
        let opt_f64 = |key: &str| -> Result<Option<f64>> {
            match get.get(key) {
                Some(v) => Ok(Some(parse_f64(key, v)?)),
                None => Ok(None),
            }
        };
        let mut ranks = Vec::new();
        let ranks_text = req("ranks")?;
        if !ranks_text.is_empty() {
            for pair in ranks_text.split(',') {
                let (c, d) = pair.split_once('=').ok_or_else(|| {
                    Error::MalformedFile(format!("bad rank entry '{pair}'"))
                })?;
                let mut chars = c.chars();
                let (Some(ch), None) = (chars.next(), chars.next()) else {
                    return Err(Error::MalformedFile(format!("bad rank index '{c}'")));
                };
                let dim: usize = d
                    .parse()
                    .map_err(|_| Error::MalformedFile(format!("bad rank value '{d}'")))?;
                ranks.push((ch, dim));
            }
        }
        Ok(RunManifest {
            model: req("model")?,
            ranks,
            loss_name: req("loss")?,
            alpha: opt_f64("alpha")?,
            beta: opt_f64("beta")?,
            dispersion: opt_f64("phi")?,
            trials: opt_f64("trials")?,
            seed: req("seed")?
                .parse()
                .map_err(|_| Error::MalformedFile("bad seed".into()))?,
            split_heldout: parse_f64("split_heldout", &req("split_heldout")?)?,
            split_validation: parse_f64("split_validation", &req("split_validation")?)?,
            max_iters: req("max_iters")?
                .parse()
                .map_err(|_| Error::MalformedFile("bad max_iters".into()))?,
            min_rel_decrease: parse_f64("min_rel_decrease", &req("min_rel_decrease")?)?,
            val_patience: req("val_patience")?
                .parse()
                .map_err(|_| Error::MalformedFile("bad val_patience".into()))?,
            epsilon: parse_f64("epsilon", &req("epsilon")?)?,
            optimizer: req("optimizer")?,
            learning_rate: opt_f64("learning_rate")?,
            data_path: req("data")?,
        })
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        Self::parse_text(&fs::read_to_string(path)?)
    }
}
