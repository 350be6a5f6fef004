//! Simulated readout: photon counting, polarization path marking and weak
//! polarization probes.
//!
//! Because the five splitters map the input ports back onto themselves, every
//! path is a fixed vector in the input basis and an operation "on path `i`"
//! is an operation with the projector `|i><i|`. Postselection on output port
//! `o` is a projection onto the input basis vector `|o>`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{
    pol_expectation, CMat3, DensityMatrix, PathPolOperator, Pol2, C64, PAULI_X, PAULI_Y, ZERO,
};
use crate::interferometer::{Context, PathId, PathVectorTable};
use crate::states::{path_probability, NEGATIVE_TOL};

/// Largest coupling angle accepted by [`weak_probe`], in radians.
pub const MAX_COUPLING: f64 = 0.3;
/// Largest coupling angle accepted by [`probe_extrapolate`].
pub const MAX_EXTRAPOLATION_COUPLING: f64 = 0.1;
/// Minimum unperturbed postselection probability for a probe.
pub const PROBE_POSTSELECTION_TOL: f64 = 1e-9;
pub const DEFAULT_EPSILONS: [f64; 3] = [0.04, 0.02, 0.01];

/// Detector counts for one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord {
    pub context: Context,
    pub shots: u64,
    /// Counts in the order of `context.paths()`.
    pub counts: [u64; 3],
    pub seed: u64,
}

impl CountRecord {
    pub fn count(&self, p: PathId) -> Option<u64> {
        self.context
            .paths()
            .iter()
            .position(|&q| q == p)
            .map(|k| self.counts[k])
    }

    pub fn frequency(&self, p: PathId) -> Option<f64> {
        self.count(p).map(|c| c as f64 / self.shots as f64)
    }
}

/// Born probabilities over a context. Values within rounding of zero are set
/// to exactly zero so the sampler can never select them.
pub fn context_probabilities(
    rho: &DensityMatrix,
    table: &PathVectorTable,
    context: &Context,
) -> Result<[f64; 3]> {
    let mut p = [0.0; 3];
    for (slot, &i) in p.iter_mut().zip(context.paths().iter()) {
        let v = path_probability(rho, table, i)?;
        *slot = if v <= NEGATIVE_TOL { 0.0 } else { v };
    }
    Ok(p)
}

/// Draws `shots` independent detections over `context` with inverse-CDF
/// sampling from a ChaCha generator seeded by `seed`.
pub fn sample_context(
    rho: &DensityMatrix,
    table: &PathVectorTable,
    context: &Context,
    shots: u64,
    seed: u64,
) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let p = context_probabilities(rho, table, context)?;
    let total: f64 = p.iter().sum();
    let cdf = [p[0] / total, (p[0] + p[1]) / total];
    let last = (0..3).rev().find(|&k| p[k] > 0.0).unwrap_or(2);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 3];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let k = if u < cdf[0] {
            0
        } else if u < cdf[1] {
            1
        } else {
            last
        };
        counts[k] += 1;
    }
    Ok(CountRecord {
        context: *context,
        shots,
        counts,
        seed,
    })
}

/// Joint output statistics when path `i` is marked by a full polarization
/// flip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerDistribution {
    pub path: PathId,
    /// `P(o, flipped)` for `o = 1, 2, 3`.
    pub flipped: [f64; 3],
    /// `P(o, unflipped)` for `o = 1, 2, 3`.
    pub unflipped: [f64; 3],
}

impl MarkerDistribution {
    pub fn flipped_marginal(&self) -> f64 {
        self.flipped.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.flipped_marginal() + self.unflipped.iter().sum::<f64>()
    }
}

/// A flipped polarization is orthogonal to the unflipped one, so the marked
/// and unmarked parts of the state no longer interfere at the output:
/// `P(o, flipped) = <o|Π rho Π|o>`, `P(o, unflipped) = <o|(1-Π) rho (1-Π)|o>`.
pub fn mark_path(rho: &DensityMatrix, table: &PathVectorTable, i: PathId) -> MarkerDistribution {
    let proj = table.projector(i);
    let comp = CMat3::identity() - proj;
    let marked = proj * *rho.matrix() * proj;
    let unmarked = comp * *rho.matrix() * comp;
    let mut flipped = [0.0; 3];
    let mut unflipped = [0.0; 3];
    for (k, o) in PathId::PORTS.into_iter().enumerate() {
        let v = table.vector(o);
        flipped[k] = marked.sandwich(v, v).re.max(0.0);
        unflipped[k] = unmarked.sandwich(v, v).re.max(0.0);
    }
    MarkerDistribution {
        path: i,
        flipped,
        unflipped,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMode {
    /// Exact pointer expectation values.
    Exact,
    /// Finite statistics: `shots` postselected photons read out in each of
    /// the diagonal and circular polarization bases.
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    pub path: PathId,
    pub outcome: PathId,
    pub epsilon: f64,
    pub estimate: C64,
    /// Probability of the postselection with the coupling switched on.
    pub postselection_probability: f64,
    pub mode: ProbeMode,
}

/// Postselected, normalized polarization state after coupling path `i` with
/// strength `eps`.
fn postselected_pointer(
    rho: &DensityMatrix,
    table: &PathVectorTable,
    i: PathId,
    o: PathId,
    eps: f64,
) -> (Pol2, f64) {
    let h_only: Pol2 = [[C64::new(1.0, 0.0), ZERO], [ZERO, ZERO]];
    let initial = PathPolOperator::kron(rho.matrix(), &h_only);
    let coupling = PathPolOperator::projector_coupling(&table.projector(i), eps);
    let evolved = coupling * initial * coupling.adjoint();
    let pol = evolved.postselect_path(table.vector(o));
    let norm = (pol[0][0] + pol[1][1]).re;
    let scaled = pol.map(|row| row.map(|z| z / norm));
    (scaled, norm)
}

/// Weak polarization probe of path `i` postselected on port `o`.
///
/// The pointer starts in `H` and is rotated toward `V` by `eps` on path `i`.
/// The estimate `(<X> + i<Y>) / (2 eps)` of the postselected pointer tends to
/// `W(i|o)` as `eps -> 0`; the leading error is quadratic in `eps`.
pub fn weak_probe(
    rho: &DensityMatrix,
    table: &PathVectorTable,
    i: PathId,
    o: PathId,
    eps: f64,
    mode: ProbeMode,
) -> Result<ProbeResult> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "coupling angle must be positive, got {eps}"
        )));
    }
    if eps > MAX_COUPLING {
        return Err(Error::CouplingTooLarge(eps));
    }
    let p_o = rho.expectation(table.vector(o));
    if p_o <= PROBE_POSTSELECTION_TOL {
        return Err(Error::ImpossiblePostselection {
            outcome: o.to_string(),
            probability: p_o,
        });
    }
    let (pointer, norm) = postselected_pointer(rho, table, i, o, eps);
    let x = pol_expectation(&pointer, &PAULI_X).re;
    let y = pol_expectation(&pointer, &PAULI_Y).re;
    let (x, y) = match mode {
        ProbeMode::Exact => (x, y),
        ProbeMode::Sampled { shots, seed } => {
            if shots == 0 {
                return Err(Error::InvalidArgument("shots must be at least 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (
                sample_pauli_mean(&mut rng, x, shots),
                sample_pauli_mean(&mut rng, y, shots),
            )
        }
    };
    Ok(ProbeResult {
        path: i,
        outcome: o,
        epsilon: eps,
        estimate: C64::new(x, y) / (2.0 * eps),
        postselection_probability: norm,
        mode,
    })
}

/// Mean of `shots` ±1 outcomes with expectation `mean`.
fn sample_pauli_mean(rng: &mut ChaCha8Rng, mean: f64, shots: u64) -> f64 {
    let p_plus = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
    let plus = (0..shots).filter(|_| rng.random::<f64>() < p_plus).count() as f64;
    (2.0 * plus - shots as f64) / shots as f64
}

/// Zero-coupling limit of a series of weak probes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeExtrapolation {
    pub intercept: C64,
    /// Coefficient of `eps²`.
    pub curvature: C64,
    pub probes: Vec<ProbeResult>,
}

/// Runs [`weak_probe`] at each coupling and extrapolates to `eps = 0`.
///
/// The estimator is even in `eps`, so the fit is a least-squares line in
/// `eps²`. In sampled mode the probe at position `k` uses seed `seed + k`.
pub fn probe_extrapolate(
    rho: &DensityMatrix,
    table: &PathVectorTable,
    i: PathId,
    o: PathId,
    epsilons: &[f64],
    mode: ProbeMode,
) -> Result<ProbeExtrapolation> {
    let mut distinct = epsilons.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidArgument(
            "extrapolation needs at least 3 distinct coupling angles".into(),
        ));
    }
    if let Some(bad) = epsilons
        .iter()
        .find(|&&e| !(e > 0.0 && e <= MAX_EXTRAPOLATION_COUPLING))
    {
        return Err(Error::InvalidArgument(format!(
            "extrapolation coupling {bad} outside (0, {MAX_EXTRAPOLATION_COUPLING}]"
        )));
    }
    let probes = epsilons
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            let m = match mode {
                ProbeMode::Exact => ProbeMode::Exact,
                ProbeMode::Sampled { shots, seed } => ProbeMode::Sampled {
                    shots,
                    seed: seed.wrapping_add(k as u64),
                },
            };
            weak_probe(rho, table, i, o, eps, m)
        })
        .collect::<Result<Vec<_>>>()?;

    let xs: Vec<f64> = probes.iter().map(|p| p.epsilon * p.epsilon).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = probes.iter().map(|p| p.estimate).sum::<C64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: C64 = xs
        .iter()
        .zip(probes.iter())
        .map(|(x, p)| (p.estimate - y_mean) * (x - x_mean))
        .sum();
    let curvature = sxy / sxx;
    Ok(ProbeExtrapolation {
        intercept: y_mean - curvature * x_mean,
        curvature,
        probes,
    })
}
