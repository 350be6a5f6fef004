//! Fixed-dimension complex linear algebra.
//!
//! Everything the interferometer needs lives in a 3-dimensional Hilbert space
//! (one basis vector per input port). The weak probe additionally couples a
//! two-level polarization pointer, which is handled by [`PathPolOperator`] as
//! a 2x2 block matrix of 3x3 path operators.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Norms below this are treated as zero.
pub const ZERO_NORM_TOL: f64 = 1e-12;
/// Hermiticity and trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-12;
/// Lower bound on the minimum eigenvalue of a density matrix.
pub const POSITIVITY_TOL: f64 = -1e-10;

/// A ket in the 3-dimensional path space, expressed in the input basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CVec3(pub [C64; 3]);

impl CVec3 {
    pub const fn new(a: C64, b: C64, c: C64) -> Self {
        CVec3([a, b, c])
    }

    pub fn from_real(a: f64, b: f64, c: f64) -> Self {
        CVec3([C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0)])
    }

    /// Unit vector `e_k` of the input basis (`k` in 0..3).
    pub fn basis(k: usize) -> Self {
        let mut v = [ZERO; 3];
        v[k] = ONE;
        CVec3(v)
    }

    pub fn zero() -> Self {
        CVec3([ZERO; 3])
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVec3) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&self) -> Result<CVec3> {
        let n = self.norm();
        if n < ZERO_NORM_TOL {
            return Err(Error::ZeroNorm(n));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: C64) -> CVec3 {
        CVec3(self.0.map(|z| z * c))
    }

    pub fn scale_real(&self, c: f64) -> CVec3 {
        CVec3(self.0.map(|z| z * c))
    }

    pub fn conj(&self) -> CVec3 {
        CVec3(self.0.map(|z| z.conj()))
    }

    /// `|self><other|`.
    pub fn outer(&self, other: &CVec3) -> CMat3 {
        let mut m = CMat3::zero();
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] = self.0[r] * other.0[c].conj();
            }
        }
        m
    }

    /// Projector `|self><self|`.
    pub fn projector(&self) -> CMat3 {
        self.outer(self)
    }

    /// Cross product of the complex conjugates, which is orthogonal (in the
    /// Hermitian sense) to both arguments.
    pub fn orthogonal_complement(a: &CVec3, b: &CVec3) -> CVec3 {
        let (a, b) = (a.conj(), b.conj());
        CVec3([
            a.0[1] * b.0[2] - a.0[2] * b.0[1],
            a.0[2] * b.0[0] - a.0[0] * b.0[2],
            a.0[0] * b.0[1] - a.0[1] * b.0[0],
        ])
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CVec3) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for CVec3 {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl Add for CVec3 {
    type Output = CVec3;
    fn add(self, rhs: CVec3) -> CVec3 {
        CVec3([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl Sub for CVec3 {
    type Output = CVec3;
    fn sub(self, rhs: CVec3) -> CVec3 {
        CVec3([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl Neg for CVec3 {
    type Output = CVec3;
    fn neg(self) -> CVec3 {
        CVec3(self.0.map(|z| -z))
    }
}

/// `<a|b>`.
pub fn inner(a: &CVec3, b: &CVec3) -> C64 {
    a.inner(b)
}

/// A 3x3 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat3(pub [[C64; 3]; 3]);

impl CMat3 {
    pub fn zero() -> Self {
        CMat3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for k in 0..3 {
            m.0[k][k] = ONE;
        }
        m
    }

    pub fn from_real(rows: [[f64; 3]; 3]) -> Self {
        CMat3(rows.map(|r| r.map(|x| C64::new(x, 0.0))))
    }

    pub fn adjoint(&self) -> CMat3 {
        let mut m = Self::zero();
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] = self.0[c][r].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn scale(&self, c: C64) -> CMat3 {
        CMat3(self.0.map(|r| r.map(|z| z * c)))
    }

    pub fn apply(&self, v: &CVec3) -> CVec3 {
        let mut out = [ZERO; 3];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|c| self.0[r][c] * v.0[c]).sum();
        }
        CVec3(out)
    }

    /// Matrix element `<a|M|b>`.
    pub fn sandwich(&self, a: &CVec3, b: &CVec3) -> C64 {
        a.inner(&self.apply(b))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMat3) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..3 {
            for c in 0..3 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// `max |M - M†|` entrywise.
    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `max |M†M - I|` entrywise.
    pub fn unitary_deviation(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&CMat3::identity())
    }

    pub fn determinant(&self) -> C64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Eigenvalues of the Hermitian part of the matrix, in descending order.
    ///
    /// Cyclic complex Jacobi rotations; accurate to rounding even for
    /// degenerate spectra.
    pub fn hermitian_eigenvalues(&self) -> [f64; 3] {
        let mut a = (*self + self.adjoint()).scale(C64::new(0.5, 0.0));
        let scale = a.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
        for _sweep in 0..64 {
            let off: f64 = [(0, 1), (0, 2), (1, 2)]
                .iter()
                .map(|&(p, q)| a.0[p][q].norm_sqr())
                .sum();
            if off <= f64::EPSILON * f64::EPSILON * scale * 1e-4 || off == 0.0 {
                break;
            }
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                let apq = a.0[p][q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                // Phase on column q makes the (p,q) entry real, then a real
                // rotation in the (p,q) plane annihilates it.
                let phase = apq.conj() / mag;
                let theta = 0.5 * (2.0 * mag).atan2(a.0[q][q].re - a.0[p][p].re);
                let (s, c) = theta.sin_cos();
                let mut j = CMat3::identity();
                j.0[p][p] = C64::new(c, 0.0);
                j.0[p][q] = C64::new(s, 0.0);
                j.0[q][p] = phase * -s;
                j.0[q][q] = phase * c;
                a = j.adjoint() * a * j;
            }
        }
        let mut eig = [a.0[0][0].re, a.0[1][1].re, a.0[2][2].re];
        eig.sort_by(|x, y| y.total_cmp(x));
        eig
    }
}

impl Index<(usize, usize)> for CMat3 {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for CMat3 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.0[r][c]
    }
}

impl Add for CMat3 {
    type Output = CMat3;
    fn add(self, rhs: CMat3) -> CMat3 {
        let mut m = self;
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] += rhs.0[r][c];
            }
        }
        m
    }
}

impl Sub for CMat3 {
    type Output = CMat3;
    fn sub(self, rhs: CMat3) -> CMat3 {
        let mut m = self;
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] -= rhs.0[r][c];
            }
        }
        m
    }
}

impl Mul for CMat3 {
    type Output = CMat3;
    fn mul(self, rhs: CMat3) -> CMat3 {
        let mut m = CMat3::zero();
        for r in 0..3 {
            for c in 0..3 {
                m.0[r][c] = (0..3).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        m
    }
}

/// A validated density matrix: Hermitian, unit trace and positive
/// semidefinite, all checked at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat3,
}

impl DensityMatrix {
    /// Validates `matrix` and wraps it.
    pub fn new(matrix: CMat3) -> Result<Self> {
        let herm = matrix.hermitian_deviation();
        if herm > DENSITY_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let min_eig = matrix.hermitian_eigenvalues()[2];
        if min_eig < POSITIVITY_TOL {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(DensityMatrix { matrix })
    }

    /// `|psi><psi|` for a unit vector.
    pub fn pure(psi: &CVec3) -> Result<Self> {
        let n = psi.norm();
        if n < ZERO_NORM_TOL {
            return Err(Error::ZeroNorm(n));
        }
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "pure state must be normalized, got norm {n}"
            )));
        }
        // Renormalize so the trace is 1 to machine precision.
        let psi = psi.scale_real(1.0 / n);
        Ok(DensityMatrix {
            matrix: psi.projector(),
        })
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            matrix: CMat3::identity().scale(C64::new(1.0 / 3.0, 0.0)),
        }
    }

    /// `G G† / tr(G G†)` with `G` a matrix of independent standard complex
    /// Gaussians drawn from a ChaCha generator seeded with `seed`.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = CMat3::zero();
        for r in 0..3 {
            for c in 0..3 {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                g.0[r][c] = C64::new(re, im);
            }
        }
        let ggd = g * g.adjoint();
        let tr = ggd.trace().re;
        let mut m = ggd.scale(C64::new(1.0 / tr, 0.0));
        // Force exact Hermiticity; the product is Hermitian up to rounding.
        for r in 0..3 {
            m.0[r][r].im = 0.0;
            for c in (r + 1)..3 {
                m.0[c][r] = m.0[r][c].conj();
            }
        }
        DensityMatrix { matrix: m }
    }

    pub fn matrix(&self) -> &CMat3 {
        &self.matrix
    }

    /// `<a|rho|b>`.
    pub fn element(&self, a: &CVec3, b: &CVec3) -> C64 {
        self.matrix.sandwich(a, b)
    }

    /// `<v|rho|v>` (real for Hermitian `rho`).
    pub fn expectation(&self, v: &CVec3) -> f64 {
        self.element(v, v).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.hermitian_eigenvalues()[2]
    }

    /// Conjugation `U rho U†`, used to apply a global phase or basis change.
    pub fn conjugated(&self, u: &CMat3) -> Result<Self> {
        DensityMatrix::new(*u * self.matrix * u.adjoint())
    }
}

/// `|psi><psi|`.
pub fn pure_density(psi: &CVec3) -> Result<DensityMatrix> {
    DensityMatrix::pure(psi)
}

/// Deterministic random density matrix for property sweeps.
pub fn random_density(seed: u64) -> DensityMatrix {
    DensityMatrix::random(seed)
}

/// A 2x2 complex matrix on the polarization pointer, basis `(H, V)`.
pub type Pol2 = [[C64; 2]; 2];

pub const POL_IDENTITY: Pol2 = [[ONE, ZERO], [ZERO, ONE]];
pub const PAULI_X: Pol2 = [[ZERO, ONE], [ONE, ZERO]];
pub const PAULI_Y: Pol2 = [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]];
pub const PAULI_Z: Pol2 = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];

/// `tr(rho * op)` for 2x2 matrices.
pub fn pol_expectation(rho: &Pol2, op: &Pol2) -> C64 {
    let mut acc = ZERO;
    for r in 0..2 {
        for k in 0..2 {
            acc += rho[r][k] * op[k][r];
        }
    }
    acc
}

/// Operator on the 6-dimensional path ⊗ polarization space, stored as
/// polarization blocks: `blocks[p][q]` is the path operator multiplying
/// `|p><q|` on the pointer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPolOperator {
    pub blocks: [[CMat3; 2]; 2],
}

impl PathPolOperator {
    pub fn zero() -> Self {
        PathPolOperator {
            blocks: [[CMat3::zero(); 2]; 2],
        }
    }

    pub fn identity() -> Self {
        Self::kron(&CMat3::identity(), &POL_IDENTITY)
    }

    /// `path ⊗ pol`.
    pub fn kron(path: &CMat3, pol: &Pol2) -> Self {
        let mut out = Self::zero();
        for p in 0..2 {
            for q in 0..2 {
                out.blocks[p][q] = path.scale(pol[p][q]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for p in 0..2 {
            for q in 0..2 {
                out.blocks[p][q] = self.blocks[q][p].adjoint();
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = *self;
        for row in out.blocks.iter_mut() {
            for b in row.iter_mut() {
                *b = b.scale(c);
            }
        }
        out
    }

    /// Entry `(r, c)` of the equivalent dense 6x6 matrix with index
    /// `3 * polarization + path`.
    pub fn dense_entry(&self, r: usize, c: usize) -> C64 {
        self.blocks[r / 3][c / 3].0[r % 3][c % 3]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for p in 0..2 {
            for q in 0..2 {
                worst = worst.max(self.blocks[p][q].max_abs_diff(&other.blocks[p][q]));
            }
        }
        worst
    }

    /// Coupling `exp(-i eps Π ⊗ Y)` for a projector `Π`.
    ///
    /// Since `Π² = Π` and `Y² = 1`, the exponential is
    /// `(1 - Π) ⊗ 1 + Π ⊗ (cos eps - i sin eps Y)`, which rotates `H`
    /// toward `V` by `eps` on the projected subspace.
    pub fn projector_coupling(projector: &CMat3, eps: f64) -> Self {
        let complement = CMat3::identity() - *projector;
        let rot: Pol2 = [
            [C64::new(eps.cos(), 0.0), C64::new(-eps.sin(), 0.0)],
            [C64::new(eps.sin(), 0.0), C64::new(eps.cos(), 0.0)],
        ];
        Self::kron(&complement, &POL_IDENTITY) + Self::kron(projector, &rot)
    }

    /// Reduced polarization state after projecting the path onto `|o>`
    /// (unnormalized): `<o| blocks[p][q] |o>`.
    pub fn postselect_path(&self, o: &CVec3) -> Pol2 {
        let mut out = [[ZERO; 2]; 2];
        for (p, row) in out.iter_mut().enumerate() {
            for (q, x) in row.iter_mut().enumerate() {
                *x = self.blocks[p][q].sandwich(o, o);
            }
        }
        out
    }
}

impl Add for PathPolOperator {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for p in 0..2 {
            for q in 0..2 {
                out.blocks[p][q] = out.blocks[p][q] + rhs.blocks[p][q];
            }
        }
        out
    }
}

impl Mul for PathPolOperator {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for p in 0..2 {
            for q in 0..2 {
                out.blocks[p][q] =
                    self.blocks[p][0] * rhs.blocks[0][q] + self.blocks[p][1] * rhs.blocks[1][q];
            }
        }
        out
    }
}
