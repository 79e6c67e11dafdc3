//! JSON fixtures for channels and states. Complex numbers are `[re, im]` pairs.

use std::path::Path;

use entcert::channel::KrausChannel;
use entcert::linalg::{purify, CMatrix, CVector, DensityMatrix, PureState, SystemShape};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

pub type Complex = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpecFile {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub in_dim: usize,
    pub out_dim: usize,
    /// Each operator as `out_dim` rows of `in_dim` entries.
    pub kraus: Vec<Vec<Vec<Complex>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpecFile {
    pub format_version: u32,
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Complex>>>,
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
}

/// A loaded state: pure inputs are kept as vectors.
#[derive(Debug, Clone)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl LoadedState {
    pub fn density(&self) -> DensityMatrix {
        match self {
            Self::Pure(p) => p.to_density(),
            Self::Mixed(m) => m.clone(),
        }
    }

    /// A pure input on `(R, Q)`. Two-factor pure states are used as given;
    /// anything else is taken as `ρ^Q` on a single system and purified with a
    /// reference `R` placed first.
    pub fn reference_input(&self) -> Result<PureState, CliError> {
        match self {
            Self::Pure(p) if p.shape().len() == 2 => Ok(p.clone()),
            other => {
                let rho = other.density().flatten("Q")?;
                let psi = purify(&rho, "R")?;
                Ok(psi.permute(&["R", "Q"])?)
            }
        }
    }
}

fn to_complex(z: Complex) -> Complex64 {
    Complex64::new(z[0], z[1])
}

fn from_complex(z: &Complex64) -> Complex {
    [z.re, z.im]
}

fn matrix_from_rows(
    rows: &[Vec<Complex>],
    nrows: usize,
    ncols: usize,
    what: &str,
) -> Result<CMatrix, CliError> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::Invalid(format!("{what} must be {nrows}×{ncols}")));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
        to_complex(rows[i][j])
    }))
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Complex>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| from_complex(&m[(i, j)])).collect())
        .collect()
}

fn check_version(v: u32) -> Result<(), CliError> {
    if v != FORMAT_VERSION {
        return Err(CliError::Parse(format!(
            "unsupported format_version {v} (expected {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

impl ChannelSpecFile {
    pub fn from_channel(channel: &KrausChannel, name: Option<String>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            name,
            in_dim: channel.in_dim(),
            out_dim: channel.out_dim(),
            kraus: channel.operators().iter().map(matrix_to_rows).collect(),
        }
    }

    /// Build the channel, checking completeness.
    pub fn to_channel(&self) -> Result<KrausChannel, CliError> {
        check_version(self.format_version)?;
        if self.kraus.is_empty() {
            return Err(CliError::Invalid("channel has no Kraus operators".into()));
        }
        let ops = self
            .kraus
            .iter()
            .enumerate()
            .map(|(k, rows)| {
                matrix_from_rows(rows, self.out_dim, self.in_dim, &format!("kraus[{k}]"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(KrausChannel::new(ops)?)
    }
}

impl StateSpecFile {
    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: StateKind::Pure,
            amplitudes: Some(psi.amplitudes().iter().map(from_complex).collect()),
            matrix: None,
            dims: psi.shape().dims().to_vec(),
            labels: psi.shape().labels().to_vec(),
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: StateKind::Mixed,
            amplitudes: None,
            matrix: Some(matrix_to_rows(rho.matrix())),
            dims: rho.shape().dims().to_vec(),
            labels: rho.shape().labels().to_vec(),
        }
    }

    pub fn to_state(&self) -> Result<LoadedState, CliError> {
        check_version(self.format_version)?;
        let shape = SystemShape::new(self.dims.clone(), self.labels.clone())?;
        let n = shape.total_dim();
        match self.kind {
            StateKind::Pure => {
                let amps = self
                    .amplitudes
                    .as_ref()
                    .ok_or_else(|| CliError::Parse("pure state needs `amplitudes`".into()))?;
                let v = CVector::from_iterator(amps.len(), amps.iter().map(|&z| to_complex(z)));
                Ok(LoadedState::Pure(PureState::new(v, shape)?))
            }
            StateKind::Mixed => {
                let rows = self
                    .matrix
                    .as_ref()
                    .ok_or_else(|| CliError::Parse("mixed state needs `matrix`".into()))?;
                let m = matrix_from_rows(rows, n, n, "matrix")?;
                Ok(LoadedState::Mixed(DensityMatrix::new(m, shape)?))
            }
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
