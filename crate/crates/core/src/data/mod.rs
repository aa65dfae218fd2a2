//! Dataset loading, preprocessing, synthetic spectra and the reference
//! eigenpair oracle.

mod libsvm;
mod preprocess;
mod reference;
mod synthetic;

pub use libsvm::{parse_libsvm, parse_libsvm_str, to_libsvm_string};
pub use preprocess::{minmax_scale, standardize, Preprocessing, MIN_STD};
pub use reference::{reference_eigenpairs, reference_eigenpairs_with, ReferenceMethod, SpectralReference, MIN_GAP};
pub use synthetic::{spectrum_b, synthetic_spectrum, synthetic_spectrum_with, Rotation, SPECTRUM_B_N};

use std::path::PathBuf;

use crate::error::{invalid, Result};
use crate::matrix::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Libsvm(PathBuf),
    Synthetic {
        spectrum: Vec<f64>,
        n: usize,
        seed: u64,
        rotation: Rotation,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    pub source: DataSource,
    pub preprocessing: Preprocessing,
}

/// A loaded dataset together with its reference eigenpairs.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub name: String,
    pub data: DataMatrix,
    pub reference: SpectralReference,
}

impl DatasetSpec {
    pub fn synthetic(name: &str, spectrum: Vec<f64>, n: usize, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            source: DataSource::Synthetic {
                spectrum,
                n,
                seed,
                rotation: Rotation::Random,
            },
            preprocessing: Preprocessing::None,
        }
    }

    /// `a₁ = (2, 0)`, `a₂ = (0, 1)`, so `C = diag(2, 0.5)`.
    pub fn fixture_a() -> Self {
        Self {
            name: "fixture-a".into(),
            source: DataSource::Synthetic {
                spectrum: vec![2.0, 0.5],
                n: 2,
                seed: 0,
                rotation: Rotation::Identity,
            },
            preprocessing: Preprocessing::None,
        }
    }

    pub fn spectrum_b(seed: u64) -> Self {
        Self::synthetic("spectrum-b", spectrum_b(), SPECTRUM_B_N, seed)
    }

    pub fn libsvm(path: impl Into<PathBuf>, preprocessing: Preprocessing) -> Self {
        let path = path.into();
        Self {
            name: path.file_name().map_or_else(|| "libsvm".into(), |f| f.to_string_lossy().into_owned()),
            source: DataSource::Libsvm(path),
            preprocessing,
        }
    }

    /// Parses `synthetic:<name>` or
    /// `synthetic:lambdas=1,0.5,0.1;n=200;seed=7`, or else a LIBSVM path.
    pub fn parse(spec: &str, preprocessing: Preprocessing) -> Result<Self> {
        let Some(body) = spec.strip_prefix("synthetic:") else {
            return Ok(Self::libsvm(spec, preprocessing));
        };
        let mut out = match body {
            "fixture-a" => Self::fixture_a(),
            "spectrum-b" => Self::spectrum_b(7),
            _ => {
                let mut spectrum = None;
                let mut n = None;
                let mut seed = 0;
                for part in body.split(';').filter(|p| !p.is_empty()) {
                    let (k, v) = part
                        .split_once('=')
                        .ok_or_else(|| invalid(format!("bad synthetic field {part:?}")))?;
                    match k.trim() {
                        "lambdas" => {
                            spectrum = Some(
                                v.split(',')
                                    .map(|x| x.trim().parse::<f64>())
                                    .collect::<std::result::Result<Vec<_>, _>>()
                                    .map_err(|e| invalid(format!("bad lambdas: {e}")))?,
                            )
                        }
                        "n" => n = Some(v.trim().parse().map_err(|e| invalid(format!("bad n: {e}")))?),
                        "seed" => seed = v.trim().parse().map_err(|e| invalid(format!("bad seed: {e}")))?,
                        other => return Err(invalid(format!("unknown synthetic field {other:?}"))),
                    }
                }
                let spectrum = spectrum.ok_or_else(|| invalid("synthetic spec needs lambdas=…"))?;
                let n = n.unwrap_or(SPECTRUM_B_N.max(spectrum.len()));
                Self::synthetic("synthetic", spectrum, n, seed)
            }
        };
        out.preprocessing = preprocessing;
        Ok(out)
    }

    pub fn load(&self) -> Result<LoadedDataset> {
        let (raw, exact) = match &self.source {
            DataSource::Libsvm(path) => (parse_libsvm(path)?, None),
            DataSource::Synthetic {
                spectrum,
                n,
                seed,
                rotation,
            } => {
                let (d, r) = synthetic_spectrum_with(spectrum, *n, *seed, *rotation)?;
                (d, Some(r))
            }
        };
        let data = self.preprocessing.apply(&raw)?;
        let reference = match (exact, self.preprocessing) {
            (Some(r), Preprocessing::None) => r,
            _ => reference_eigenpairs(&data, 2)?,
        };
        Ok(LoadedDataset {
            name: self.name.clone(),
            data,
            reference,
        })
    }
}

/// Published metadata for the real-world benchmark datasets, for optional
/// full-scale runs. None of these files are bundled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetInfo {
    pub name: &'static str,
    pub n: usize,
    pub d: usize,
    /// Fraction of nonzero entries, in percent.
    pub density_percent: f64,
    pub ratio: f64,
    pub preprocessing: Preprocessing,
}

pub const BENCHMARK_DATASETS: [DatasetInfo; 6] = [
    DatasetInfo { name: "ijcnn", n: 91_701, d: 22, density_percent: 59.09, ratio: 0.9921, preprocessing: Preprocessing::Standardize },
    DatasetInfo { name: "cov", n: 581_012, d: 54, density_percent: 22.00, ratio: 0.7894, preprocessing: Preprocessing::Standardize },
    DatasetInfo { name: "MSD", n: 463_715, d: 90, density_percent: 100.00, ratio: 0.6776, preprocessing: Preprocessing::Standardize },
    DatasetInfo { name: "MNIST", n: 70_000, d: 764, density_percent: 1.96, ratio: 0.7167, preprocessing: Preprocessing::Standardize },
    DatasetInfo { name: "sim", n: 72_309, d: 20_958, density_percent: 0.24, ratio: 0.4053, preprocessing: Preprocessing::MinMax },
    DatasetInfo { name: "rcv1", n: 804_414, d: 47_236, density_percent: 0.16, ratio: 0.4289, preprocessing: Preprocessing::MinMax },
];
