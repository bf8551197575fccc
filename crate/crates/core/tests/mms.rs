use dropletfem::mms::{convergence_study, format_table, Manufactured};

/// Central differences of the exact fields against the stated derivatives.
#[test]
fn exact_derivatives_match_finite_differences() {
    let p = Manufactured::standard();
    let (dz, dt) = (1e-7 * p.length, 1e-6);
    for k in 1..10 {
        let z = p.length * k as f64 / 10.0;
        let t = 0.013;
        let e = p.exact(z, t);
        let at = |z: f64, t: f64| p.exact(z, t);
        let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= 1e-6 * scale;
        let hz_scale = p.fp.h_in / p.length;
        assert!(close((at(z + dz, t).h - at(z - dz, t).h) / (2.0 * dz), e.h_z, hz_scale));
        assert!(close((at(z + dz, t).h_z - at(z - dz, t).h_z) / (2.0 * dz), e.h_zz, hz_scale / p.length));
        assert!(close((at(z + dz, t).h_zz - at(z - dz, t).h_zz) / (2.0 * dz), e.h_zzz, hz_scale / p.length.powi(2)));
        assert!(close((at(z, t + dt).h - at(z, t - dt).h) / (2.0 * dt), e.h_t, p.fp.h_in / p.tau));
        let uz_scale = p.fp.u_in / p.length;
        assert!(close((at(z + dz, t).u - at(z - dz, t).u) / (2.0 * dz), e.u_z, uz_scale));
        assert!(close((at(z + dz, t).u_z - at(z - dz, t).u_z) / (2.0 * dz), e.u_zz, uz_scale / p.length));
        assert!(close((at(z, t + dt).u - at(z, t - dt).u) / (2.0 * dt), e.u_t, p.fp.u_in / p.tau));
    }
}

#[test]
fn second_order_convergence_and_sharp_estimator() {
    let rows = convergence_study(&Manufactured::standard(), 4, 16).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].rate_h.is_none());
    for r in &rows[1..] {
        assert!(r.rate_h.unwrap() > 1.9, "{}", format_table(&rows));
        assert!(r.rate_u.unwrap() > 1.9, "{}", format_table(&rows));
    }
    for r in &rows {
        assert!((0.5..=2.0).contains(&r.effectivity));
        assert!(r.empirical_c > 0.0 && r.empirical_c < 1.0);
    }
    // eta tracks the O(h) slope error, so it halves per level.
    for w in rows.windows(2) {
        let ratio = w[0].eta_global / w[1].eta_global;
        assert!((ratio - 2.0).abs() < 0.1, "eta ratio {ratio}");
    }
}

#[test]
fn discrete_solution_holds_dirichlet_values() {
    let p = Manufactured::standard();
    let (mesh, st) = p.solve(16).unwrap();
    let n = mesh.n_nodes() - 1;
    let (l, r) = (p.exact(0.0, st.t), p.exact(p.length, st.t));
    assert_eq!((st.u[0], st.h[0], st.u[n], st.h[n]), (l.u, l.h, r.u, r.h));
    assert!((st.t - p.t_final).abs() < 1e-15);
}

#[test]
fn invalid_study_requests_are_rejected() {
    assert!(convergence_study(&Manufactured::standard(), 0, 16).is_err());
    assert!(Manufactured { n_steps: 0, ..Manufactured::standard() }.solve(16).is_err());
    assert!(Manufactured::standard().solve(2).is_err());
}
