//! Serialized forms: state files and versioned report documents.

use std::io;

use serde::{Deserialize, Serialize};

use crate::audit::AuditReport;
use crate::detect::DetectionVerdict;
use crate::discord::DiscordResult;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, C64};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEntry {
    pub re: f64,
    pub im: f64,
}

/// `{dims, matrix}` with `matrix` the row-major entries of the density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<ComplexEntry>,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let m = rho.data();
        let n = m.nrows();
        let matrix = (0..n * n)
            .map(|k| {
                let z = m[(k / n, k % n)];
                ComplexEntry { re: z.re, im: z.im }
            })
            .collect();
        Self {
            dims: rho.dims().to_vec(),
            matrix,
        }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        if self.dims.is_empty() || self.dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidArgument(format!(
                "dims must be a non-empty list of integers >= 2, got {:?}",
                self.dims
            )));
        }
        let n: usize = self.dims.iter().product();
        if self.matrix.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} entries, dims {:?} need {}",
                self.matrix.len(),
                self.dims,
                n * n
            )));
        }
        let data = CMatrix::from_fn(n, n, |r, c| {
            let z = self.matrix[r * n + c];
            C64::new(z.re, z.im)
        });
        DensityMatrix::new(self.dims.clone(), data)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool_version: String,
    /// SHA-256 of the canonical state file; set by the caller.
    pub input_digest: Option<String>,
    pub dims: Option<Vec<usize>>,
    pub analysis: Option<DetectionVerdict>,
    pub discord: Vec<DiscordResult>,
    pub audit: Option<AuditReport>,
    pub timing: Option<Timing>,
}

impl ReportDocument {
    pub fn new() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_digest: None,
            dims: None,
            analysis: None,
            discord: Vec::new(),
            audit: None,
            timing: None,
        }
    }
}

impl Default for ReportDocument {
    fn default() -> Self {
        Self::new()
    }
}

/// Pretty JSON formatter writing every float with 17 significant digits.
pub struct ExactFloatFormatter<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

impl ExactFloatFormatter<'_> {
    pub fn new() -> Self {
        Self {
            inner: serde_json::ser::PrettyFormatter::new(),
        }
    }
}

impl Default for ExactFloatFormatter<'_> {
    fn default() -> Self {
        Self::new()
    }
}

macro_rules! forward {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.inner.$name(w)
            }
        )*
    };
}

impl serde_json::ser::Formatter for ExactFloatFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    forward!(
        begin_array,
        end_array,
        end_array_value,
        begin_object,
        end_object,
        begin_object_value,
        end_object_value
    );
}

/// Serializes with [`ExactFloatFormatter`].
pub fn to_json_exact<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloatFormatter::new());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    String::from_utf8(buf).map_err(|e| Error::Numerical(e.to_string()))
}
