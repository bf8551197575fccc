use proptest::prelude::*;

use dropletfem::mesh::Mesh1D;

fn mesh_and_field() -> impl Strategy<Value = (Mesh1D, Vec<f64>, Vec<usize>)> {
    (4usize..40).prop_flat_map(|n| {
        (
            Just(n),
            1e-4f64..1.0,
            proptest::collection::vec(-1.0f64..1.0, n + 1),
            proptest::collection::btree_set(0..n, 0..n),
        )
            .prop_map(|(n, length, field, marked)| {
                (Mesh1D::build_uniform(n, length).unwrap(), field, marked.into_iter().collect())
            })
    })
}

proptest! {
    #[test]
    fn transferred_fields_reproduce_old_nodes((mesh, field, marked) in mesh_and_field()) {
        let (fine, fields) = mesh.bisect(&marked, &[&field]).unwrap();
        prop_assert_eq!(fine.n_elements(), mesh.n_elements() + marked.len());
        for (i, &zeta) in mesh.ref_coords().iter().enumerate() {
            let j = fine.ref_coords().iter().position(|&x| x == zeta).unwrap();
            prop_assert_eq!(fields[0][j], field[i]);
        }
        for k in 0..fine.n_elements() {
            let mid = 0.5 * (fine.ref_coords()[k] + fine.ref_coords()[k + 1]);
            let a = mesh.interpolate(&field, mid);
            let b = fine.interpolate(&fields[0], mid);
            prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
        }
    }

    #[test]
    fn unmarked_elements_are_untouched((mesh, field, marked) in mesh_and_field()) {
        let (fine, _) = mesh.bisect(&marked, &[&field]).unwrap();
        let zf = fine.ref_coords();
        for e in (0..mesh.n_elements()).filter(|e| !marked.contains(e)) {
            let (a, b) = (mesh.ref_coords()[e], mesh.ref_coords()[e + 1]);
            let k = zf.iter().position(|&x| x == a).unwrap();
            prop_assert_eq!(zf[k + 1], b);
            prop_assert_eq!(fine.generations()[k], mesh.generations()[e]);
        }
        for w in zf.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn growth_keeps_reference_profiles((mesh, field, _) in mesh_and_field(), factor in 0.1f64..10.0) {
        let grown = mesh.grow_domain(mesh.length() * factor).unwrap();
        prop_assert_eq!(grown.ref_coords(), mesh.ref_coords());
        for k in 0..=20 {
            let zeta = k as f64 / 20.0;
            prop_assert_eq!(grown.interpolate(&field, zeta), mesh.interpolate(&field, zeta));
        }
        for i in 0..grown.n_nodes() {
            prop_assert_eq!(grown.z(i), grown.ref_coords()[i] * grown.length());
        }
    }
}

#[test]
fn compounded_growth() {
    let mut mesh = Mesh1D::build_uniform(8, 1.0).unwrap();
    for _ in 0..10 {
        mesh = mesh.grow_domain(mesh.length() * 1.01).unwrap();
    }
    assert!((mesh.length() - 1.01f64.powi(10)).abs() < 1e-14);
    assert_eq!(mesh.ref_coords(), Mesh1D::build_uniform(8, 1.0).unwrap().ref_coords());
}
