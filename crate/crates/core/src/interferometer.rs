//! The five-beam-splitter network.
//!
//! Starting from the input context `{1, 2, 3}`, each beam splitter interferes
//! one outer and one inner path and thereby moves to the next context:
//!
//! ```text
//! {1,2,3} -BS1-> {1,S1,D1} -BS2-> {f,S1,P1} -BS3-> {f,S2,P2} -BS4-> {2,S2,D2} -BS5-> {1,2,3}
//! ```
//!
//! Every splitter uses the same real template with the inner input `b`:
//! `u = √R a + √(1-R) b`, `v = √(1-R) a - √R b`. With `R_f = (1-R1)(1-R2)`
//! and the matching `R_S1`, `R_S2` the output ports coincide exactly (sign
//! included) with the input ports.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hilbert::{CMat3, CVec3};

/// Maximum deviation from orthonormality accepted by [`beamsplitter_pair`].
pub const ORTHO_TOL: f64 = 1e-12;

/// Reflectivities of the five beam splitters. Only `r1` and `r2` are free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerConfig {
    pub r1: f64,
    pub r2: f64,
    pub rf: f64,
    pub rs1: f64,
    pub rs2: f64,
}

impl InterferometerConfig {
    /// Derives `R_f`, `R_S1` and `R_S2` from the first and last reflectivity.
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        check_open_unit("r1", r1)?;
        check_open_unit("r2", r2)?;
        let rf = (1.0 - r1) * (1.0 - r2);
        let rs1 = 1.0 - r2 / (1.0 - rf);
        let rs2 = 1.0 - r1 / (1.0 - rf);
        check_open_unit("rf", rf)?;
        check_open_unit("rs1", rs1)?;
        check_open_unit("rs2", rs2)?;
        Ok(InterferometerConfig {
            r1,
            r2,
            rf,
            rs1,
            rs2,
        })
    }

    /// The configuration with all five reflectivities equal to `(3-√5)/2`.
    pub fn symmetric() -> Self {
        let r = symmetric_reflectivity();
        Self::new(r, r).expect("symmetric reflectivity lies in (0,1)")
    }

    /// `[r1, rs1, rf, rs2, r2]` in beam-splitter order.
    pub fn by_splitter(&self) -> [f64; 5] {
        [self.r1, self.rs1, self.rf, self.rs2, self.r2]
    }
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        Self::new(0.5, 0.5).expect("balanced configuration is valid")
    }
}

/// `(3 - √5)/2`, the solution of `R = (1-R)²` in (0,1).
pub fn symmetric_reflectivity() -> f64 {
    (3.0 - 5f64.sqrt()) / 2.0
}

fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::DegenerateReflectivity { name, value })
    }
}

/// See [`InterferometerConfig::new`].
pub fn derive_reflectivities(r1: f64, r2: f64) -> Result<InterferometerConfig> {
    InterferometerConfig::new(r1, r2)
}

/// The ten paths of the interferometer. The ports `1`, `2`, `3` serve both as
/// input and output context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathId {
    One,
    Two,
    Three,
    S1,
    D1,
    F,
    P1,
    S2,
    P2,
    D2,
}

impl PathId {
    pub const ALL: [PathId; 10] = [
        PathId::One,
        PathId::Two,
        PathId::Three,
        PathId::S1,
        PathId::D1,
        PathId::F,
        PathId::P1,
        PathId::S2,
        PathId::P2,
        PathId::D2,
    ];

    /// The input/output ports `1, 2, 3`.
    pub const PORTS: [PathId; 3] = [PathId::One, PathId::Two, PathId::Three];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            PathId::One => "1",
            PathId::Two => "2",
            PathId::Three => "3",
            PathId::S1 => "S1",
            PathId::D1 => "D1",
            PathId::F => "f",
            PathId::P1 => "P1",
            PathId::S2 => "S2",
            PathId::P2 => "P2",
            PathId::D2 => "D2",
        }
    }

    /// Outer paths are shared by two contexts; inner paths belong to one.
    pub fn is_outer(self) -> bool {
        matches!(
            self,
            PathId::One | PathId::S1 | PathId::F | PathId::S2 | PathId::Two
        )
    }

    pub fn is_port(self) -> bool {
        matches!(self, PathId::One | PathId::Two | PathId::Three)
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PathId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        PathId::ALL
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown path '{s}'")))
    }
}

/// A measurement context: three mutually exclusive paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Context(pub [PathId; 3]);

impl Context {
    pub fn paths(&self) -> [PathId; 3] {
        self.0
    }

    pub fn contains(&self, p: PathId) -> bool {
        self.0.contains(&p)
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.0[0], self.0[1], self.0[2])
    }
}

impl FromStr for Context {
    type Err = Error;

    /// Parses `"f,S1,P1"`; the triple must be one of the five contexts, in
    /// any order. The given order is kept.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(PathId::from_str)
            .collect::<Result<Vec<_>>>()?;
        let triple: [PathId; 3] = parts
            .try_into()
            .map_err(|_| Error::InvalidArgument(format!("context '{s}' must name three paths")))?;
        let candidate = Context(triple);
        let known = contexts()
            .into_iter()
            .any(|c| triple.iter().all(|p| c.contains(*p)) && triple[0] != triple[1]
                && triple[1] != triple[2] && triple[0] != triple[2]);
        if known {
            Ok(candidate)
        } else {
            Err(Error::InvalidArgument(format!(
                "'{s}' is not one of the five measurement contexts"
            )))
        }
    }
}

/// The five contexts in construction order.
pub fn contexts() -> [Context; 5] {
    use PathId::*;
    [
        Context([One, Two, Three]),
        Context([One, S1, D1]),
        Context([F, S1, P1]),
        Context([F, S2, P2]),
        Context([Two, S2, D2]),
    ]
}

/// One beam splitter: outer input `a`, inner input `b`, outputs `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    pub name: &'static str,
    pub inputs: (PathId, PathId),
    pub outputs: (PathId, PathId),
    pub reflectivity: f64,
}

/// Applies the splitter template to an orthonormal pair `(a, b)`.
pub fn beamsplitter_pair(a: &CVec3, b: &CVec3, reflectivity: f64) -> Result<(CVec3, CVec3)> {
    let deviation = a
        .inner(b)
        .norm()
        .max((a.norm() - 1.0).abs())
        .max((b.norm() - 1.0).abs());
    if deviation > ORTHO_TOL {
        return Err(Error::NonOrthogonalInputs(deviation));
    }
    if !(0.0..=1.0).contains(&reflectivity) {
        return Err(Error::DegenerateReflectivity {
            name: "R",
            value: reflectivity,
        });
    }
    let r = reflectivity.sqrt();
    let t = (1.0 - reflectivity).sqrt();
    let u = a.scale_real(r) + b.scale_real(t);
    let v = a.scale_real(t) - b.scale_real(r);
    Ok((u, v))
}

/// All path vectors of a configured interferometer, plus the beam-splitter
/// records and the output-port vectors produced by the last splitter.
#[derive(Debug, Clone, PartialEq)]
pub struct PathVectorTable {
    pub config: InterferometerConfig,
    vectors: [CVec3; 10],
    pub splitters: [BeamSplitter; 5],
    /// `|1_out>, |2_out>, |3_out>` as produced by BS4 and BS5.
    pub outputs: [CVec3; 3],
}

impl PathVectorTable {
    pub fn build(config: InterferometerConfig) -> Result<Self> {
        use PathId::*;
        let [r1, rs1, rf, rs2, r2] = config.by_splitter();
        let e = [CVec3::basis(0), CVec3::basis(1), CVec3::basis(2)];

        let (s1, d1) = beamsplitter_pair(&e[1], &e[2], r1)?;
        let (f, p1) = beamsplitter_pair(&e[0], &d1, rs1)?;
        let (s2, p2) = beamsplitter_pair(&s1, &p1, rf)?;
        let (two_out, d2) = beamsplitter_pair(&f, &p2, rs2)?;
        let (one_out, three_out) = beamsplitter_pair(&s2, &d2, r2)?;

        let splitters = [
            BeamSplitter {
                name: "BS1",
                inputs: (Two, Three),
                outputs: (S1, D1),
                reflectivity: r1,
            },
            BeamSplitter {
                name: "BS2",
                inputs: (One, D1),
                outputs: (F, P1),
                reflectivity: rs1,
            },
            BeamSplitter {
                name: "BS3",
                inputs: (S1, P1),
                outputs: (S2, P2),
                reflectivity: rf,
            },
            BeamSplitter {
                name: "BS4",
                inputs: (F, P2),
                outputs: (Two, D2),
                reflectivity: rs2,
            },
            BeamSplitter {
                name: "BS5",
                inputs: (S2, D2),
                outputs: (One, Three),
                reflectivity: r2,
            },
        ];

        Ok(PathVectorTable {
            config,
            vectors: [e[0], e[1], e[2], s1, d1, f, p1, s2, p2, d2],
            splitters,
            outputs: [one_out, two_out, three_out],
        })
    }

    pub fn vector(&self, p: PathId) -> &CVec3 {
        &self.vectors[p.index()]
    }

    /// Projector `|i><i|` onto path `i`.
    pub fn projector(&self, p: PathId) -> CMat3 {
        self.vector(p).projector()
    }

    /// Largest entrywise deviation of the output ports from the input basis.
    pub fn closure_residual(&self) -> f64 {
        self.outputs
            .iter()
            .enumerate()
            .map(|(k, v)| v.max_abs_diff(&CVec3::basis(k)))
            .fold(0.0, f64::max)
    }

    /// Largest deviation from orthonormality within any of the five contexts.
    pub fn context_orthonormality(&self) -> f64 {
        let mut worst = 0.0f64;
        for ctx in contexts() {
            for a in ctx.paths() {
                for b in ctx.paths() {
                    let target = if a == b { 1.0 } else { 0.0 };
                    let ip = self.vector(a).inner(self.vector(b));
                    worst = worst.max((ip.re - target).abs().max(ip.im.abs()));
                }
            }
        }
        worst
    }
}

pub fn build_network(config: InterferometerConfig) -> Result<PathVectorTable> {
    PathVectorTable::build(config)
}

pub fn closure_residual(table: &PathVectorTable) -> f64 {
    table.closure_residual()
}

pub fn path_vector(table: &PathVectorTable, p: PathId) -> CVec3 {
    *table.vector(p)
}
