//! Weak values, Kirkwood-Dirac elements and coherence coefficients.
//!
//! For a path `i` and an outcome `o` the conditional current is the weak value
//!
//! ```text
//! W(i|o) = <o|i><i|rho|o> / <o|rho|o>
//! ```
//!
//! and its numerator `W(i|o) P(o)` is a Kirkwood-Dirac element. The numerator
//! expands over the output basis as `sum_n C(i|n,o) <n|rho|o>` with the
//! state-independent coefficients `C(i|n,o) = <o|i><i|n>`.

use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, C64};
use crate::interferometer::{contexts, PathId, PathVectorTable};

/// Postselection probabilities at or below this make a weak value undefined.
pub const POSTSELECTION_TOL: f64 = 1e-12;

/// A conditional current `W(i|o)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakValue {
    pub value: C64,
    pub path: PathId,
    pub outcome: PathId,
    pub postselection_probability: f64,
}

/// A Kirkwood-Dirac element `<o|i><i|rho|o>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdElement {
    pub value: C64,
    pub path: PathId,
    pub outcome: PathId,
}

/// `C(i|n,o) = <o|i><i|n>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceCoefficient {
    pub value: C64,
    pub path: PathId,
    pub bra_outcome: PathId,
    pub ket_outcome: PathId,
}

/// Numerator `<o|i><i|rho|o>`, defined for every outcome including
/// zero-probability ones.
pub fn kd_element(rho: &DensityMatrix, table: &PathVectorTable, i: PathId, o: PathId) -> KdElement {
    let vi = table.vector(i);
    let vo = table.vector(o);
    KdElement {
        value: vo.inner(vi) * rho.element(vi, vo),
        path: i,
        outcome: o,
    }
}

/// `W(i|o)`. The outcome may be any path: intermediate paths such as `D1`
/// are treated exactly like the output ports.
pub fn weak_value(
    rho: &DensityMatrix,
    table: &PathVectorTable,
    i: PathId,
    o: PathId,
) -> Result<WeakValue> {
    let p_o = rho.expectation(table.vector(o));
    if p_o <= POSTSELECTION_TOL {
        return Err(Error::ImpossiblePostselection {
            outcome: o.to_string(),
            probability: p_o,
        });
    }
    Ok(WeakValue {
        value: kd_element(rho, table, i, o).value / p_o,
        path: i,
        outcome: o,
        postselection_probability: p_o,
    })
}

/// Continuity residuals `W(a|o) + W(b|o) - W(u|o) - W(v|o)`, one per beam
/// splitter in construction order.
pub fn continuity_residuals(
    rho: &DensityMatrix,
    table: &PathVectorTable,
    o: PathId,
) -> Result<[C64; 5]> {
    let w = |i| weak_value(rho, table, i, o).map(|w| w.value);
    let mut out = [C64::new(0.0, 0.0); 5];
    for (slot, bs) in out.iter_mut().zip(table.splitters.iter()) {
        *slot = w(bs.inputs.0)? + w(bs.inputs.1)? - w(bs.outputs.0)? - w(bs.outputs.1)?;
    }
    Ok(out)
}

/// Residuals of the two relations for the current through `f`:
///
/// ```text
/// W(f|D1) P(D1) = W(f|2) P(2) + W(f|3) P(3)
/// W(f|D2) P(D2) = W(f|1) P(1) + W(f|3) P(3)
/// ```
///
/// evaluated with Kirkwood-Dirac elements, so they hold at `P(D1) = 0` too.
pub fn dcont_check(rho: &DensityMatrix, table: &PathVectorTable) -> [C64; 2] {
    use PathId::*;
    let kd = |o| kd_element(rho, table, F, o).value;
    [
        kd(D1) - kd(Two) - kd(Three),
        kd(D2) - kd(One) - kd(Three),
    ]
}

pub fn coherence_coefficient(
    table: &PathVectorTable,
    i: PathId,
    n: PathId,
    o: PathId,
) -> CoherenceCoefficient {
    let vi = table.vector(i);
    CoherenceCoefficient {
        value: table.vector(o).inner(vi) * vi.inner(table.vector(n)),
        path: i,
        bra_outcome: o,
        ket_outcome: n,
    }
}

/// `|KD(i,o) - sum_n C(i|n,o) <n|rho|o>|` over the output ports `n`.
pub fn kd_reconstruction_residual(
    rho: &DensityMatrix,
    table: &PathVectorTable,
    i: PathId,
    o: PathId,
) -> f64 {
    let vo = table.vector(o);
    let expansion: C64 = PathId::PORTS
        .iter()
        .map(|&n| coherence_coefficient(table, i, n, o).value * rho.element(table.vector(n), vo))
        .sum();
    (kd_element(rho, table, i, o).value - expansion).norm()
}

/// Which coherence the current-difference route reconstructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceTarget {
    /// `C(i|3,1)` from the currents of the input state `S2` postselected on `1`.
    ThreeOne,
    /// `C(i|3,2)` from the currents of the input state `S1` postselected on `2`.
    ThreeTwo,
}

impl CoherenceTarget {
    /// `(reference path, postselected port)`.
    fn route(self) -> (PathId, PathId) {
        match self {
            CoherenceTarget::ThreeOne => (PathId::S2, PathId::One),
            CoherenceTarget::ThreeTwo => (PathId::S1, PathId::Two),
        }
    }
}

/// The target reachable by the current-difference route for `C(i|n,o)`.
pub fn coherence_target(n: PathId, o: PathId) -> Option<CoherenceTarget> {
    match (n, o) {
        (PathId::Three, PathId::One) => Some(CoherenceTarget::ThreeOne),
        (PathId::Three, PathId::Two) => Some(CoherenceTarget::ThreeTwo),
        _ => None,
    }
}

impl std::str::FromStr for CoherenceTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "31" => Ok(CoherenceTarget::ThreeOne),
            "32" => Ok(CoherenceTarget::ThreeTwo),
            other => Err(Error::InvalidArgument(format!(
                "coherence target must be 31 or 32, got '{other}'"
            ))),
        }
    }
}

/// Coherence coefficients recovered from differences of conditional currents:
///
/// ```text
/// C(i|3,o) = <o|s>/<3|s> * (W(i|s,o) - |<i|o>|²)
/// ```
///
/// with `s = S2, o = 1` or `s = S1, o = 2`. The reference state `s` is a
/// superposition of `o` and `3` only, so the difference isolates the
/// coherence between `3` and `o`. Indexed by [`PathId::index`].
pub fn current_difference_coefficients(
    table: &PathVectorTable,
    target: CoherenceTarget,
) -> Result<[C64; 10]> {
    let (s, o) = target.route();
    let vs = table.vector(s);
    let vo = table.vector(o);
    let three = table.vector(PathId::Three);
    let ratio = vo.inner(vs) / three.inner(vs);
    let rho_s = DensityMatrix::pure(vs)?;
    let mut out = [C64::new(0.0, 0.0); 10];
    for i in PathId::ALL {
        let w = weak_value(&rho_s, table, i, o)?.value;
        let direct = table.vector(i).inner(vo).norm_sqr();
        out[i.index()] = ratio * (w - direct);
    }
    Ok(out)
}

/// One row of a [`WeakReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakEntry {
    pub path: PathId,
    pub outcome: PathId,
    /// `None` when the outcome has (numerically) zero probability.
    pub weak_value: Option<C64>,
    pub kd: C64,
}

/// All conditional currents for one input state.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakReport {
    /// `P(1), P(2), P(3)`.
    pub outcome_probabilities: [f64; 3],
    /// Ten paths per outcome, outcome-major.
    pub entries: Vec<WeakEntry>,
    /// Continuity residuals per outcome; `None` where postselection fails.
    pub continuity: [Option<[C64; 5]>; 3],
    pub dcont: [C64; 2],
}

impl WeakReport {
    pub fn new(rho: &DensityMatrix, table: &PathVectorTable) -> Self {
        let mut entries = Vec::with_capacity(30);
        let mut continuity = [None; 3];
        let mut outcome_probabilities = [0.0; 3];
        for (k, &o) in PathId::PORTS.iter().enumerate() {
            outcome_probabilities[k] = rho.expectation(table.vector(o));
            for i in PathId::ALL {
                entries.push(WeakEntry {
                    path: i,
                    outcome: o,
                    weak_value: weak_value(rho, table, i, o).ok().map(|w| w.value),
                    kd: kd_element(rho, table, i, o).value,
                });
            }
            continuity[k] = continuity_residuals(rho, table, o).ok();
        }
        WeakReport {
            outcome_probabilities,
            entries,
            continuity,
            dcont: dcont_check(rho, table),
        }
    }

    pub fn entry(&self, i: PathId, o: PathId) -> Option<&WeakEntry> {
        self.entries.iter().find(|e| e.path == i && e.outcome == o)
    }

    pub fn has_undefined(&self) -> bool {
        self.entries.iter().any(|e| e.weak_value.is_none())
    }

    /// Largest continuity or `f`-current residual in the report.
    pub fn max_residual(&self) -> f64 {
        self.continuity
            .iter()
            .flatten()
            .flat_map(|r| r.iter())
            .chain(self.dcont.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Largest deviation of `sum_{i in C} W(i|o)` from one over all contexts.
pub fn row_sum_deviation(rho: &DensityMatrix, table: &PathVectorTable, o: PathId) -> Result<f64> {
    let mut worst = 0.0f64;
    for ctx in contexts() {
        let mut sum = C64::new(0.0, 0.0);
        for i in ctx.paths() {
            sum += weak_value(rho, table, i, o)?.value;
        }
        worst = worst.max((sum - 1.0).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random_density, CVec3};
    use crate::interferometer::{build_network, InterferometerConfig};
    use crate::states::make_nf;
    use PathId::*;

    fn balanced() -> PathVectorTable {
        build_network(InterferometerConfig::default()).unwrap()
    }

    fn nf_rho(t: &PathVectorTable) -> DensityMatrix {
        DensityMatrix::pure(&make_nf(t).unwrap()).unwrap()
    }

    fn close(z: C64, re: f64) -> bool {
        (z - C64::new(re, 0.0)).norm() < 1e-12
    }

    #[test]
    fn nf_weak_values() {
        let t = balanced();
        let rho = nf_rho(&t);
        let w = |i, o| weak_value(&rho, &t, i, o).unwrap().value;
        let third = 1.0 / 3.0;
        assert!(close(w(F, One), third));
        assert!(close(w(F, Two), third));
        assert!(close(w(F, Three), -third));
        assert!(close(w(P2, One), -third));
        assert!(close(w(P1, Two), -third));
        assert!(close(w(D1, Two), 0.0));
        assert!(close(w(D2, One), 0.0));
        assert!(close(w(P1, One), 2.0 * third));
        assert!(close(w(S2, One), 1.0));
    }

    #[test]
    fn port_identities() {
        let t = balanced();
        for seed in 0..20 {
            let rho = random_density(seed);
            for o in PathId::PORTS {
                for i in PathId::PORTS {
                    let want = if i == o { 1.0 } else { 0.0 };
                    assert!(close(weak_value(&rho, &t, i, o).unwrap().value, want));
                }
            }
        }
    }

    #[test]
    fn impossible_postselection_is_an_error() {
        let t = balanced();
        let rho = DensityMatrix::pure(&CVec3::basis(0)).unwrap();
        assert!(matches!(
            weak_value(&rho, &t, F, Two),
            Err(Error::ImpossiblePostselection { .. })
        ));
        // The Kirkwood-Dirac element stays defined.
        assert!(kd_element(&rho, &t, F, Two).value.norm() < 1e-15);
        let report = WeakReport::new(&rho, &t);
        assert!(report.has_undefined());
        assert!(report.continuity[1].is_none());
        assert!(report.continuity[0].is_some());
    }

    #[test]
    fn kd_examples() {
        let t = balanced();
        let rho = nf_rho(&t);
        assert!(close(kd_element(&rho, &t, F, Three).value, -1.0 / 9.0));
        for seed in 0..100 {
            let rho = random_density(seed);
            for i in PathId::ALL {
                let col: C64 = PathId::PORTS
                    .iter()
                    .map(|&o| kd_element(&rho, &t, i, o).value)
                    .sum();
                assert!((col - rho.expectation(t.vector(i))).norm() < 1e-12);
            }
            for o in PathId::PORTS {
                for ctx in contexts() {
                    let row: C64 = ctx
                        .paths()
                        .iter()
                        .map(|&i| kd_element(&rho, &t, i, o).value)
                        .sum();
                    assert!((row - rho.expectation(t.vector(o))).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn continuity_examples() {
        let t = balanced();
        let rho = nf_rho(&t);
        let w = |i, o| weak_value(&rho, &t, i, o).unwrap().value;
        assert!(close(w(F, One) + w(P2, One), 0.0));
        assert!(close(w(Two, One) + w(D2, One), 0.0));

        let one = DensityMatrix::pure(&CVec3::basis(0)).unwrap();
        let w1 = |i| weak_value(&one, &t, i, One).unwrap().value;
        assert!(close(w1(One) + w1(D1), 1.0));
        assert!(close(w1(F) + w1(P1), 1.0));
        assert!(close(w1(F), 1.0 / 3.0));
        assert!(close(w1(P1), 2.0 / 3.0));

        for seed in 0..100 {
            let rho = random_density(seed);
            for o in PathId::PORTS {
                if rho.expectation(t.vector(o)) > 1e-6 {
                    for r in continuity_residuals(&rho, &t, o).unwrap() {
                        assert!(r.norm() <= 1e-10);
                    }
                    assert!(row_sum_deviation(&rho, &t, o).unwrap() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn dcont_examples() {
        let t = balanced();
        for rho in [nf_rho(&t), DensityMatrix::maximally_mixed()] {
            for r in dcont_check(&rho, &t) {
                assert!(r.norm() <= 1e-12);
            }
        }
        for seed in 0..100 {
            for r in dcont_check(&random_density(seed), &t) {
                assert!(r.norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn coherence_examples() {
        let t = balanced();
        let c = |i, n, o| coherence_coefficient(&t, i, n, o).value;
        let third = 1.0 / 3.0;
        assert!(close(c(P1, One, Two), -third));
        assert!(close(c(P2, One, Two), -third));
        assert!(close(c(F, One, Two), third));
        for i in [One, Two, Three, S1, D1, S2, D2] {
            assert!(close(c(i, One, Two), 0.0), "{i}");
        }
        assert!(close(c(F, Three, One), -third));
        assert!(close(c(P1, Three, One), third));
        assert!(close(c(S2, Three, One), 0.5));
        assert!(close(c(P2, Three, One), -1.0 / 6.0));
        assert!(close(c(D2, Three, One), -0.5));
        for ctx in contexts() {
            for n in PathId::PORTS {
                for o in PathId::PORTS {
                    let sum: C64 = ctx.paths().iter().map(|&i| c(i, n, o)).sum();
                    assert!(close(sum, if n == o { 1.0 } else { 0.0 }));
                }
            }
        }
        // Symmetric for the real path vectors of this network.
        for i in PathId::ALL {
            assert!((c(i, Three, One) - c(i, One, Three)).norm() < 1e-15);
        }
    }

    #[test]
    fn reconstruction_examples() {
        let t = balanced();
        for seed in 0..100 {
            let rho = random_density(seed);
            for i in PathId::ALL {
                for o in PathId::PORTS {
                    assert!(kd_reconstruction_residual(&rho, &t, i, o) <= 1e-12);
                }
            }
        }
        assert!(kd_reconstruction_residual(&nf_rho(&t), &t, F, Three) <= 1e-12);
        // Diagonal input: only C(i|o,o) survives.
        for (k, o) in PathId::PORTS.into_iter().enumerate() {
            let rho = DensityMatrix::pure(&CVec3::basis(k)).unwrap();
            for i in PathId::ALL {
                let kd = kd_element(&rho, &t, i, o).value;
                let diag = coherence_coefficient(&t, i, o, o).value;
                assert!((kd - diag).norm() < 1e-12);
                assert!(close(diag, t.vector(i).inner(t.vector(o)).norm_sqr()));
            }
        }
    }

    #[test]
    fn current_difference_routes_agree() {
        let t = balanced();
        let via31 = current_difference_coefficients(&t, CoherenceTarget::ThreeOne).unwrap();
        let via32 = current_difference_coefficients(&t, CoherenceTarget::ThreeTwo).unwrap();
        for i in PathId::ALL {
            let direct31 = coherence_coefficient(&t, i, Three, One).value;
            let direct32 = coherence_coefficient(&t, i, Three, Two).value;
            assert!((via31[i.index()] - direct31).norm() < 1e-12, "{i}");
            assert!((via32[i.index()] - direct32).norm() < 1e-12, "{i}");
        }
        assert!(close(via31[F.index()], -1.0 / 3.0));
        assert!(close(via32[P1.index()], -1.0 / 6.0));

        let s2 = DensityMatrix::pure(t.vector(S2)).unwrap();
        for i in PathId::ALL {
            let want = if matches!(i, One | P1 | S2) { 1.0 } else { 0.0 };
            assert!(close(weak_value(&s2, &t, i, One).unwrap().value, want), "{i}");
        }
    }

    #[test]
    fn coherence_vanishes_for_orthogonal_paths() {
        let t = balanced();
        for i in PathId::ALL {
            for n in PathId::PORTS {
                for o in PathId::PORTS {
                    let orth = t.vector(i).inner(t.vector(n)).norm() < 1e-12
                        || t.vector(i).inner(t.vector(o)).norm() < 1e-12;
                    if orth {
                        assert!(coherence_coefficient(&t, i, n, o).value.norm() < 1e-12);
                    }
                }
            }
        }
    }
}
