use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use sobolev_core::geometry::{GroupModel, ModelConfig};
use sobolev_core::harness::{
    basis_stress, compare_induced, negative_sandwich, sandwich_report, spectral_gap,
    vector_factorization_residual, Ensemble, HarnessError,
};
use sobolev_core::linalg::{CMatrix, CVector};
use sobolev_core::representation::{NormKind, Representation, RepresentationConfig};
use sobolev_core::sobolev::{InducedSettings, Sobolev};

fn from_json(group: &str, rep: &str) -> Representation {
    let model: ModelConfig = serde_json::from_str(group).unwrap();
    let rep: RepresentationConfig = serde_json::from_str(rep).unwrap();
    rep.build(Arc::new(model.build().unwrap())).unwrap()
}

#[test]
fn configs_build_every_model() {
    let torus = from_json(r#"{"model":"torus","points":64}"#, r#"{"kind":"torus_regular","N":4}"#);
    assert_eq!(torus.dim(), 9);
    let su2 = from_json(r#"{"model":"su2","l_max":2}"#, r#"{"kind":"su2_irrep","l":1.5,"norm":"l1"}"#);
    assert_eq!(su2.dim(), 4);
    let euc = from_json(
        r#"{"model":"euclidean","half_width":8.0,"points":64}"#,
        r#"{"kind":"euclidean_matrix","matrices":[[[0.0,1.0],[0.0,0.0]]]}"#,
    );
    assert_eq!(euc.dim(), 2);
}

#[test]
fn gap_holds_above_threshold_for_builtin_reps() {
    let reps = [
        from_json(r#"{"model":"torus","points":64}"#, r#"{"kind":"torus_regular","N":8}"#),
        from_json(r#"{"model":"su2","l_max":2}"#, r#"{"kind":"su2_irrep","l":2}"#),
        from_json(
            r#"{"model":"euclidean","half_width":8.0,"points":64}"#,
            r#"{"kind":"euclidean_matrix","matrices":[[[0.7]]]}"#,
        ),
        from_json(
            r#"{"model":"euclidean","half_width":8.0,"points":64}"#,
            r#"{"kind":"euclidean_matrix","matrices":[[[0.0,1.0],[0.0,0.0]]]}"#,
        ),
    ];
    for rep in &reps {
        let r_e = spectral_gap(rep, 1.0).unwrap().r_e;
        for extra in [0.05, 0.3, 2.0] {
            let g = spectral_gap(rep, r_e + extra).unwrap();
            assert!(g.invertible && g.sigma_min > 0.0, "{g:?}");
        }
    }
}

#[test]
fn factorization_residual_grows_towards_threshold() {
    // documented behaviour: as R ↓ R_E the kernel decays like the orbit grows
    let rep = from_json(
        r#"{"model":"euclidean","half_width":48.0,"points":65536}"#,
        r#"{"kind":"euclidean_matrix","matrices":[[[0.5]]]}"#,
    );
    let v = CVector::from_element(1, Complex64::new(1.0, 0.0));
    let far = vector_factorization_residual(&rep, &v, 2.0, 1).unwrap().residual;
    let near = vector_factorization_residual(&rep, &v, 0.6, 1).unwrap().residual;
    assert!(far < 1e-6);
    assert!(near > far);
    match vector_factorization_residual(&rep, &v, 0.5, 1) {
        Err(HarnessError::BelowThreshold { r_e, .. }) => assert!((r_e - 0.5).abs() < 1e-6),
        other => panic!("{other:?}"),
    }
}

#[test]
fn su2_vector_factorization_every_spin() {
    let model = Arc::new(GroupModel::su2(4.0).unwrap());
    for two_l in 0..=6 {
        let rep = Representation::su2_irrep(model.clone(), two_l, NormKind::L2).unwrap();
        let ens = Ensemble::new(&rep, 2, 7);
        for v in &ens.vectors {
            let res = vector_factorization_residual(&rep, v, 0.5, 2).unwrap().residual;
            assert!(res < 1e-6, "2ℓ={two_l}: {res}");
        }
    }
}

#[test]
fn sandwich_ratios_are_positive_on_su2() {
    let model = Arc::new(GroupModel::su2(2.0).unwrap());
    let rep = Representation::su2_irrep(model, 3, NormKind::L2).unwrap();
    let ens = Ensemble::new(&rep, 16, 1);
    for k in 0..=2 {
        let s = sandwich_report(&rep, k, 1.0, &ens).unwrap();
        assert!(s.lower > 0.0 && s.upper.is_finite());
        assert_eq!(s.shift, 4.0);
        let neg = negative_sandwich(&rep, k, 1.0, &ens).unwrap();
        assert!(neg.lower > 0.0 && neg.upper.is_finite());
    }
}

#[test]
fn negative_sandwich_on_torus_modes() {
    // Δp_{-k}(e_j) = (1+j²)^{-k/2}, p_{-k}(e_j)² = 1/Σ_{i≤k} j^{2i}
    let rep = from_json(r#"{"model":"torus","points":64}"#, r#"{"kind":"torus_regular","N":6}"#);
    let s = Sobolev::new(&rep);
    for j in -6..=6i64 {
        let mut v = CVector::zeros(rep.dim());
        v[rep.mode_index(&[j]).unwrap()] = Complex64::new(1.0, 0.0);
        let x = (j * j) as f64;
        for k in 1..=3u32 {
            let lap = s.laplace(&v, -(k as f64), 1.0).unwrap().value;
            let neg = s.negative(&v, k).unwrap().value;
            let closed = (0..=k).map(|i| x.powi(i as i32)).sum::<f64>().powf(-0.5);
            assert!((lap - (1.0 + x).powf(-(k as f64) / 2.0)).abs() < 1e-8 * lap);
            assert!((neg - closed).abs() < 1e-8 * closed);
        }
    }
}

#[test]
fn induced_comparison_rejects_su2() {
    let model = Arc::new(GroupModel::su2(1.0).unwrap());
    let rep = Representation::su2_irrep(model, 1, NormKind::L2).unwrap();
    let ens = Ensemble::new(&rep, 2, 1);
    assert!(compare_induced(&rep, 0.0, 0.5, 1.0, &ens, InducedSettings::default()).is_err());
}

#[test]
fn basis_rotation_of_the_plane() {
    let model = Arc::new(GroupModel::euclidean(2, 4.0, 16).unwrap());
    let a = CMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, -0.2].map(|x| Complex64::new(x, 0.0)));
    let b = CMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.4].map(|x| Complex64::new(x, 0.0)));
    let rep = Representation::euclidean_matrix(model, vec![a, b], NormKind::L2).unwrap();
    let ens = Ensemble::new(&rep, 32, 5);
    let (ct, st) = (0.8f64, 0.6f64);
    let rot = DMatrix::from_row_slice(2, 2, &[ct, -st, st, ct]);
    let (lo, hi) = basis_stress(&rep, 2, &rot, &ens).unwrap();
    assert!(lo > 0.5 && hi < 2.0 && lo <= hi);
}
