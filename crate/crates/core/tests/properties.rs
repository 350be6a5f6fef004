use ctxfer::contextuality::noncontextual_margin;
use ctxfer::hilbert::{CMat3, CVec3, DensityMatrix, C64};
use ctxfer::interferometer::{
    build_network, contexts, derive_reflectivities, InterferometerConfig, PathId, PathVectorTable,
};
use ctxfer::io::{DensityDoc, JsonComplex};
use ctxfer::states::{make_nf, nf_closed_forms, path_probability, probability_table};
use ctxfer::weak::{kd_element, row_sum_deviation, weak_value};
use proptest::prelude::*;
use PathId::*;

/// Independent propagation: the network as a sequence of 3x3 real slice
/// matrices. Row `k` of a slice is the vector of the `k`-th path crossing it.
fn slice_oracle(c: &InterferometerConfig) -> Vec<(PathId, [f64; 3])> {
    fn mix(rows: &mut [[f64; 3]; 3], a: usize, b: usize, r: f64) {
        let (s, t) = (r.sqrt(), (1.0 - r).sqrt());
        for k in 0..3 {
            let (x, y) = (rows[a][k], rows[b][k]);
            rows[a][k] = s * x + t * y;
            rows[b][k] = t * x - s * y;
        }
    }
    let mut m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut out = vec![(One, m[0]), (Two, m[1]), (Three, m[2])];
    // slot order: (1,2,3) -> (1,S1,D1) -> (f,S1,P1) -> (f,S2,P2) -> (2,S2,D2) -> (1,2,3)
    mix(&mut m, 1, 2, c.r1);
    out.extend([(S1, m[1]), (D1, m[2])]);
    mix(&mut m, 0, 2, c.rs1);
    out.extend([(F, m[0]), (P1, m[2])]);
    mix(&mut m, 1, 2, c.rf);
    out.extend([(S2, m[1]), (P2, m[2])]);
    mix(&mut m, 0, 2, c.rs2);
    out.extend([(Two, m[0]), (D2, m[2])]);
    mix(&mut m, 1, 2, c.r2);
    out.extend([(One, m[1]), (Three, m[2])]);
    out
}

fn reflectivity() -> impl Strategy<Value = f64> {
    0.02f64..0.98
}

fn amplitude() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn state() -> impl Strategy<Value = CVec3> {
    [amplitude(), amplitude(), amplitude()]
        .prop_filter("nonzero", |a| a.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-2)
        .prop_map(|a| CVec3(a).normalize().unwrap())
}

fn table(r1: f64, r2: f64) -> PathVectorTable {
    build_network(derive_reflectivities(r1, r2).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn network_matches_slice_oracle(r1 in reflectivity(), r2 in reflectivity()) {
        let c = derive_reflectivities(r1, r2).unwrap();
        let t = build_network(c).unwrap();
        for (p, want) in slice_oracle(&c) {
            let got = t.vector(p);
            for k in 0..3 {
                prop_assert!((got[k] - want[k]).norm() < 1e-12, "{p}[{k}]: {} vs {}", got[k], want[k]);
            }
        }
        prop_assert!(t.closure_residual() <= 1e-10);
        prop_assert!(t.context_orthonormality() <= 1e-12);
    }

    #[test]
    fn nf_closed_forms_hold(r1 in reflectivity(), r2 in reflectivity()) {
        let c = derive_reflectivities(r1, r2).unwrap();
        let t = build_network(c).unwrap();
        let rho = DensityMatrix::pure(&make_nf(&t).unwrap()).unwrap();
        let cf = nf_closed_forms(&c);
        let p = |i| path_probability(&rho, &t, i).unwrap();
        prop_assert!((p(F) - cf.pf).abs() < 1e-12);
        prop_assert!((p(One) - cf.p1).abs() < 1e-12);
        prop_assert!(p(D1) < 1e-12 && p(D2) < 1e-12);
        let m = noncontextual_margin(&rho, &t).unwrap();
        prop_assert!(m.violated);
    }

    #[test]
    fn inner_product_is_sesquilinear(a in state(), b in state(), c in state(), s in amplitude()) {
        let lhs = a.inner(&(b.scale(s) + c));
        let rhs = s * a.inner(&b) + a.inner(&c);
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!((a.scale(s).inner(&b) - s.conj() * a.inner(&b)).norm() < 1e-12);
        prop_assert!((a.inner(&b) - b.inner(&a).conj()).norm() < 1e-15);
    }

    #[test]
    fn context_sums_and_weak_rows(psi in state(), r1 in reflectivity(), r2 in reflectivity()) {
        let t = table(r1, r2);
        let rho = DensityMatrix::pure(&psi).unwrap();
        let probs = probability_table(&rho, &t).unwrap();
        prop_assert!(probs.max_context_deviation() < 1e-12);
        for o in PathId::PORTS {
            if rho.expectation(t.vector(o)) > 1e-3 {
                prop_assert!(row_sum_deviation(&rho, &t, o).unwrap() < 1e-9);
            }
        }
        // Summed over outcomes, the KD elements are the path marginals.
        for i in PathId::ALL {
            let s: C64 = PathId::PORTS.iter().map(|&o| kd_element(&rho, &t, i, o).value).sum();
            prop_assert!((s - probs.get(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn global_phase_is_invisible(psi in state(), phi in 0.0f64..std::f64::consts::TAU) {
        let t = table(0.5, 0.5);
        let a = DensityMatrix::pure(&psi).unwrap();
        let b = DensityMatrix::pure(&psi.scale(C64::from_polar(1.0, phi))).unwrap();
        prop_assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
        let (ma, mb) = (noncontextual_margin(&a, &t).unwrap(), noncontextual_margin(&b, &t).unwrap());
        prop_assert!((ma.margin - mb.margin).abs() < 1e-14);
        for o in PathId::PORTS {
            if let (Ok(x), Ok(y)) = (weak_value(&a, &t, F, o), weak_value(&b, &t, F, o)) {
                prop_assert!((x.value - y.value).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn mixtures_are_valid_and_spectra_consistent(a in state(), b in state(), w in 0.0f64..1.0) {
        let m = a.projector().scale(C64::new(w, 0.0)) + b.projector().scale(C64::new(1.0 - w, 0.0));
        let rho = DensityMatrix::new(m).unwrap();
        let eig = rho.matrix().hermitian_eigenvalues();
        prop_assert!(eig[0] >= eig[1] && eig[1] >= eig[2]);
        prop_assert!(eig[2] > -1e-12);
        prop_assert!((eig.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((eig[0] * eig[1] * eig[2] - rho.matrix().determinant().re).abs() < 1e-12);
    }

    #[test]
    fn density_json_round_trips_bit_exactly(a in state(), b in state(), w in 0.0f64..1.0) {
        let m = a.projector().scale(C64::new(w, 0.0)) + b.projector().scale(C64::new(1.0 - w, 0.0));
        let rho = DensityMatrix::new(m).unwrap();
        let doc = DensityDoc::from_density(&rho);
        let text = serde_json::to_string(&doc).unwrap();
        let back: DensityDoc = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        let restored = CMat3(back.density.map(|r| r.map(C64::from)));
        prop_assert_eq!(&restored, rho.matrix());
        let z: JsonComplex = a[0].into();
        prop_assert_eq!(serde_json::from_str::<JsonComplex>(&serde_json::to_string(&z).unwrap()).unwrap(), z);
    }

    #[test]
    fn every_context_partitions_unity(r1 in reflectivity(), r2 in reflectivity()) {
        let t = table(r1, r2);
        for ctx in contexts() {
            let sum = ctx.paths().iter().fold(CMat3::zero(), |acc, &p| acc + t.projector(p));
            prop_assert!(sum.max_abs_diff(&CMat3::identity()) < 1e-12);
        }
    }
}
