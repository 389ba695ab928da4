use std::io::Write;

use proptest::prelude::*;
use smmr_core::projections::{
    dense_basis_projection, identity_projection, nested_mesh_projection_1d,
    nested_mesh_projection_2d, ProjectionKind, ProjectionPair,
};

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Columns `cos(2π(k+1)(i+½)/n)` scaled to unit length are orthonormal for
/// distinct `k < n/2` (discrete cosine basis).
fn cosine_basis(n: usize, s: usize) -> String {
    let mut text = format!("# cosine basis\n{n} {s}\n");
    for i in 0..n {
        let row: Vec<String> = (0..s)
            .map(|k| {
                let v = (std::f64::consts::PI * (k + 1) as f64 * (i as f64 + 0.5) / n as f64).cos();
                format!("{:.17e}", v * (2.0 / n as f64).sqrt())
            })
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    text
}

#[test]
fn file_loaded_basis_round_trip() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(cosine_basis(64, 7).as_bytes()).unwrap();
    let p = dense_basis_projection(f.path()).unwrap();
    assert_eq!(p.kind(), ProjectionKind::DenseBasis);
    assert_eq!((p.dim_full(), p.dim_surrogate()), (64, 7));
    let z: Vec<f64> = (0..7).map(|k| (k as f64 * 1.3).sin() + 0.1).collect();
    let back = p.restrict(&p.lift(&z));
    let err: Vec<f64> = back.iter().zip(&z).map(|(a, b)| a - b).collect();
    assert!(max_abs(&err) <= 1e-13 * max_abs(&z));
}

#[test]
fn basis_file_errors() {
    assert!(ProjectionPair::parse_basis("2 1\n1 0\n1 0 3\n").is_err());
    assert!(ProjectionPair::parse_basis("2 2\n1 0\n1 0\n").is_err());
    assert!(ProjectionPair::parse_basis("1 2\n1 0\n").is_err());
    assert!(ProjectionPair::parse_basis("").is_err());
    assert!(dense_basis_projection("/nonexistent/basis.txt").is_err());
    let h = 0.5f64.sqrt();
    let p = ProjectionPair::parse_basis(&format!("2 1\n{h}\n{h}\n")).unwrap();
    assert!((p.restrict(&[1.0, 3.0])[0] - 2.0 * 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn oblique_pair_from_file() {
    // V = (1, 1)ᵀ, W = (1, 0)ᵀ: WᵀV = 1.
    let p = ProjectionPair::parse_basis("2 1\n1\n1\n1\n0\n").unwrap();
    assert_eq!(p.lift(&[2.0]), vec![2.0, 2.0]);
    assert_eq!(p.restrict(&[3.0, 5.0]), vec![3.0]);
    assert!(ProjectionPair::parse_basis("2 1\n1\n1\n0\n0\n").is_err());
}

#[test]
fn mesh_sizes_up_to_257() {
    for p in [3, 5, 9, 17, 33, 65, 129, 257] {
        let one = nested_mesh_projection_1d(p).unwrap();
        assert_eq!(one.dim_surrogate(), (p + 1) / 2);
        let two = nested_mesh_projection_2d(p, 2).unwrap();
        assert_eq!(two.dim_surrogate(), 2 * ((p + 1) / 2).pow(2));
        let z: Vec<f64> = (0..two.dim_surrogate()).map(|i| ((i * 7919) % 1000) as f64 / 999.0 - 0.5).collect();
        assert_eq!(two.restrict(&two.lift(&z)), z);
    }
    assert!(nested_mesh_projection_1d(4).is_err());
    assert!(nested_mesh_projection_2d(64, 1).is_err());
    assert_eq!(identity_projection(3).unwrap().lift(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
}

proptest! {
    #[test]
    fn lift_restrict_is_idempotent(y in prop::collection::vec(-5.0f64..5.0, 2 * 17 * 17)) {
        let p = nested_mesh_projection_2d(17, 2).unwrap();
        let py = p.lift(&p.restrict(&y));
        let ppy = p.lift(&p.restrict(&py));
        let d: Vec<f64> = ppy.iter().zip(&py).map(|(a, b)| a - b).collect();
        prop_assert!(max_abs(&d) <= 1e-12 * max_abs(&y));
    }
}
