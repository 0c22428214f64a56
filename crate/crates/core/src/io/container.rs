//! Raw array container: one line of JSON header, then little-endian f64
//! payloads in header field order, each row-major over `shape`.
//!
//! ```text
//! {"format_version":1,"dtype":"f64","byte_order":"little","shape":[H,W,F],"fields":["u","v"],...}\n
//! <u: H·W·F f64 LE><v: H·W·F f64 LE>
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerHeader {
    pub format_version: u32,
    pub dtype: String,
    pub byte_order: String,
    pub shape: Vec<usize>,
    pub fields: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ppm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
    #[serde(default)]
    pub units: BTreeMap<String, String>,
    /// Named axis coordinate arrays (dispersion images).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub axes: BTreeMap<String, Vec<f64>>,
    /// Free-form string attributes.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, String>,
}

impl ContainerHeader {
    pub fn new(shape: Vec<usize>, fields: &[&str]) -> Self {
        ContainerHeader {
            format_version: FORMAT_VERSION,
            dtype: "f64".into(),
            byte_order: "little".into(),
            shape,
            fields: fields.iter().map(|s| s.to_string()).collect(),
            ppm: None,
            fps: None,
            units: BTreeMap::new(),
            axes: BTreeMap::new(),
            attrs: BTreeMap::new(),
        }
    }

    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub header: ContainerHeader,
    /// One payload per header field, each `header.element_count()` long.
    pub payloads: Vec<Vec<f64>>,
}

impl Container {
    pub fn encode(&self) -> Result<Vec<u8>> {
        let n = self.header.element_count();
        if self.payloads.len() != self.header.fields.len() {
            return Err(Error::Shape(format!(
                "{} payloads for {} fields",
                self.payloads.len(),
                self.header.fields.len()
            )));
        }
        let mut out = serde_json::to_vec(&self.header)?;
        out.push(b'\n');
        out.reserve(8 * n * self.payloads.len());
        for p in &self.payloads {
            if p.len() != n {
                return Err(Error::Shape(format!("payload of {} values, shape needs {n}", p.len())));
            }
            for v in p {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Format {
            path: path.to_path_buf(),
            reason,
        };
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("missing header terminator".into()))?;
        let header: ContainerHeader = serde_json::from_slice(&bytes[..nl]).map_err(|e| bad(format!("header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format_version {}", header.format_version)));
        }
        if header.dtype != "f64" || header.byte_order != "little" {
            return Err(bad(format!(
                "unsupported dtype/byte order {}/{}",
                header.dtype, header.byte_order
            )));
        }
        let n = header.element_count();
        let body = &bytes[nl + 1..];
        let expected = 8 * n * header.fields.len();
        if body.len() != expected {
            return Err(bad(format!("payload is {} bytes, expected {expected}", body.len())));
        }
        let payloads = body
            .chunks_exact(8 * n.max(1))
            .take(header.fields.len())
            .map(|chunk| {
                chunk
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                    .collect()
            })
            .collect::<Vec<Vec<f64>>>();
        let payloads = if n == 0 {
            vec![Vec::new(); header.fields.len()]
        } else {
            payloads
        };
        Ok(Container { header, payloads })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        super::write_atomic(path, &self.encode()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes, path)
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.header
            .fields
            .iter()
            .position(|f| f == name)
            .map(|i| self.payloads[i].as_slice())
    }
}
