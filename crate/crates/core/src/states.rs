//! Input states and path probabilities.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hilbert::{CMat3, CVec3, DensityMatrix, C64, ZERO_NORM_TOL};
use crate::interferometer::{contexts, InterferometerConfig, PathId, PathVectorTable};

/// Raw probabilities below `-NEGATIVE_TOL` are errors, not rounding.
pub const NEGATIVE_TOL: f64 = 1e-12;
/// Allowed deviation of a context sum from one.
pub const CONTEXT_SUM_TOL: f64 = 1e-9;

/// The state `N_f`: orthogonal to `D1` and `D2`, with `<1|N_f>` real positive.
pub fn make_nf(table: &PathVectorTable) -> Result<CVec3> {
    let d1 = table.vector(PathId::D1);
    let d2 = table.vector(PathId::D2);
    let kernel = CVec3::orthogonal_complement(d1, d2);
    if kernel.norm() < 1e-9 {
        return Err(Error::DegenerateKernel);
    }
    let nf = kernel.normalize()?;
    // Fix the global phase via the first component, falling back to the
    // largest one if it vanishes.
    let anchor = if nf[0].norm() > 1e-12 {
        nf[0]
    } else {
        *nf.0
            .iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("three components")
    };
    let phase = anchor.conj() / anchor.norm();
    Ok(nf.scale(phase))
}

/// Born probability `<i|rho|i>`.
pub fn path_probability(rho: &DensityMatrix, table: &PathVectorTable, i: PathId) -> Result<f64> {
    let p = rho.expectation(table.vector(i));
    if p < -NEGATIVE_TOL {
        return Err(Error::NegativeProbability {
            path: i.to_string(),
            value: p,
        });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Probabilities for all ten paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityTable {
    values: [f64; 10],
}

impl ProbabilityTable {
    pub fn get(&self, p: PathId) -> f64 {
        self.values[p.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (PathId, f64)> + '_ {
        PathId::ALL.into_iter().map(|p| (p, self.get(p)))
    }

    /// Largest deviation of a context sum from one.
    pub fn max_context_deviation(&self) -> f64 {
        contexts()
            .iter()
            .map(|c| (c.paths().iter().map(|p| self.get(*p)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub fn probability_table(rho: &DensityMatrix, table: &PathVectorTable) -> Result<ProbabilityTable> {
    let mut values = [0.0; 10];
    for p in PathId::ALL {
        values[p.index()] = path_probability(rho, table, p)?;
    }
    for ctx in contexts() {
        let sum: f64 = ctx.paths().iter().map(|p| values[p.index()]).sum();
        if (sum - 1.0).abs() > CONTEXT_SUM_TOL {
            return Err(Error::ContextSumViolation {
                context: ctx.to_string(),
                sum,
            });
        }
    }
    Ok(ProbabilityTable { values })
}

/// Closed-form path probabilities of `N_f` as functions of `R1`, `R2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NfClosedForms {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub pf: f64,
    /// `|pf - R_S1 p1|`: the `f` probability is the share of path `1`
    /// reflected at the second splitter.
    pub branching_residual: f64,
}

pub fn nf_closed_forms(config: &InterferometerConfig) -> NfClosedForms {
    let (r1, r2) = (config.r1, config.r2);
    let denom = 1.0 - r1 * r2;
    let p1 = r2 * (1.0 - r1) / denom;
    let p2 = r1 * (1.0 - r2) / denom;
    let p3 = (1.0 - r1) * (1.0 - r2) / denom;
    let pf = r1 * r2 * (1.0 - r1) * (1.0 - r2) / (denom * (1.0 - (1.0 - r1) * (1.0 - r2)));
    NfClosedForms {
        p1,
        p2,
        p3,
        pf,
        branching_residual: (pf - config.rs1 * p1).abs(),
    }
}

/// How an input state is specified on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// The paradox state of the configured network.
    Nf,
    /// Pure state from three complex amplitudes in the input basis.
    Amplitudes([C64; 3]),
    /// Density matrix read from a JSON file.
    DensityFile(std::path::PathBuf),
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("nf") {
            return Ok(StateSpec::Nf);
        }
        if let Some(path) = s.strip_prefix('@') {
            return Ok(StateSpec::DensityFile(path.into()));
        }
        let amps = s
            .split(',')
            .map(|tok| {
                C64::from_str(tok.trim()).map_err(|_| {
                    Error::InvalidArgument(format!("cannot parse amplitude '{}'", tok.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let amps: [C64; 3] = amps.try_into().map_err(|v: Vec<C64>| {
            Error::InvalidArgument(format!("expected 3 amplitudes, got {}", v.len()))
        })?;
        Ok(StateSpec::Amplitudes(amps))
    }
}

impl StateSpec {
    /// Resolves the specification to a density matrix for `table`.
    pub fn resolve(&self, table: &PathVectorTable) -> Result<DensityMatrix> {
        match self {
            StateSpec::Nf => DensityMatrix::pure(&make_nf(table)?),
            StateSpec::Amplitudes(a) => amplitudes_to_density(a),
            StateSpec::DensityFile(path) => read_density_file(path),
        }
    }
}

/// Normalizes three amplitudes and returns the pure state.
pub fn amplitudes_to_density(amps: &[C64; 3]) -> Result<DensityMatrix> {
    let v = CVec3(*amps);
    let n = v.norm();
    if n < ZERO_NORM_TOL {
        return Err(Error::ZeroNorm(n));
    }
    DensityMatrix::pure(&v.normalize()?)
}

/// Parses a state specification that does not need an interferometer
/// (amplitudes or a density file).
pub fn parse_state(spec: &str) -> Result<DensityMatrix> {
    match spec.parse::<StateSpec>()? {
        StateSpec::Nf => Err(Error::InvalidArgument(
            "'nf' depends on the interferometer configuration".into(),
        )),
        other => other.resolve(&PathVectorTable::build(InterferometerConfig::default())?),
    }
}

pub fn read_density_file(path: &Path) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)?;
    let doc: crate::io::DensityDoc = serde_json::from_str(&text)?;
    density_from_rows(&doc.density)
}

pub fn density_from_rows(rows: &[[crate::io::JsonComplex; 3]; 3]) -> Result<DensityMatrix> {
    let mut m = CMat3::zero();
    for (r, row) in rows.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            m[(r, c)] = C64::from(*z);
        }
    }
    DensityMatrix::new(m)
}
