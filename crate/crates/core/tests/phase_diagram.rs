use proptest::prelude::*;
use spectral_atlas::ak::{decompose_cofactor, LowRankProblem};
use spectral_atlas::curves::{envelope, standard_curves, AtlasSampling};
use spectral_atlas::kernel::{eig_dense, DenseMatrix};
use spectral_atlas::phase::*;

fn ex1() -> LowRankProblem {
    LowRankProblem::example1()
}

#[test]
fn example_one_grid_census() {
    let g = phase_grid(&ex1(), Window::square(-12.0, 2.0), 100, 100, DEFAULT_TOL).unwrap();
    let counts = g.census_counts();
    for (census, n) in &counts {
        assert!(example1_letter(*census).is_some() || *census == EXAMPLE1_STRIP, "{census:?} x{n}");
    }
    let seen: Vec<char> = counts.iter().filter_map(|c| example1_letter(c.0)).collect();
    assert_eq!(seen, vec!['C', 'B', 'G', 'E', 'A', 'F']);
    // origin sits in A (four distinct real stable eigenvalues after a tiny kick)
    assert_eq!(classify_point(&ex1(), 0.1, 0.1, DEFAULT_TOL).unwrap().census(), (4, 0));
}

#[test]
fn region_d_lies_above_the_window() {
    let l = classify_point(&ex1(), -8.4, 3.0, DEFAULT_TOL).unwrap();
    assert_eq!(example1_letter(l.census()), Some('D'));
    assert_eq!(l.dominant, Dominant::ComplexUnstable);
}

#[test]
fn transitions_follow_the_curves() {
    let p = ex1();
    let d = decompose_cofactor(&p).unwrap();
    let g = phase_grid(&p, Window::square(-12.0, 2.0), 60, 60, DEFAULT_TOL).unwrap();
    let s = AtlasSampling { lambda: (-30.0, 10.0), omega_max: 30.0, rho: (-12.5, 2.5), samples: 3000 };
    let curves = standard_curves(&d, s).unwrap();
    let (n, covered) = transition_coverage(&g, &curves);
    assert!(n > 100);
    assert!(covered as f64 >= 0.99 * n as f64, "{covered}/{n}");
}

#[test]
fn grid_is_deterministic_across_pools() {
    let p = ex1();
    let w = Window { rho1_min: -3.0, rho1_max: 1.0, rho2_min: -5.0, rho2_max: 0.5 };
    let a = phase_grid(&p, w, 17, 13, DEFAULT_TOL).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| phase_grid(&p, w, 17, 13, DEFAULT_TOL).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.at(0, 0), classify_point(&p, -3.0, -5.0, DEFAULT_TOL).unwrap());
    assert_eq!(a.at(16, 12), classify_point(&p, 1.0, 0.5, DEFAULT_TOL).unwrap());
}

#[test]
fn origin_splits_real_in_every_direction() {
    let p = ex1();
    let d = decompose_cofactor(&p).unwrap();
    assert_eq!(local_splitting(&p, &d, -2.0, 0.0, 0.0).unwrap(), Splitting::RealPair);
    for k in 0..12 {
        let t = k as f64 * std::f64::consts::PI / 6.0;
        let l = classify_point(&p, 1e-4 * t.cos(), 1e-4 * t.sin(), DEFAULT_TOL).unwrap();
        assert_eq!(l.n_real, 4, "direction {t}");
    }
}

#[test]
fn splitting_across_an_envelope_branch() {
    let p = ex1();
    let d = decompose_cofactor(&p).unwrap();
    let lam = -4.0;
    let b = envelope(&d, &[lam - 1e-3, lam, lam + 1e-3]);
    let br = b.iter().find(|c| c.points.len() == 3).unwrap();
    let (a, m, c) = (&br.points[0], &br.points[1], &br.points[2]);
    let (tx, ty) = (c.rho1 - a.rho1, c.rho2 - a.rho2);
    let nrm = tx.hypot(ty);
    let (nx, ny) = (-ty / nrm, tx / nrm);
    for sgn in [1.0, -1.0] {
        let (r1, r2) = (m.rho1 + sgn * 1e-6 * nx, m.rho2 + sgn * 1e-6 * ny);
        let ev = eig_dense(&p.perturbed_matrix(r1, r2)).unwrap().values;
        let near: Vec<_> = ev.iter().filter(|z| (z.re - lam).abs() < 0.1).collect();
        assert_eq!(near.len(), 2);
        let want = if near[0].im.abs() > 1e-9 { Splitting::ComplexPair } else { Splitting::RealPair };
        assert_eq!(local_splitting(&p, &d, lam, r1, r2).unwrap(), want);
    }
}

#[test]
fn indefinite_double_point_is_mixed() {
    // [[1, ρ₁], [ρ₂, 1]] has eigenvalues 1 ± √(ρ₁ρ₂)
    let m = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let p =
        LowRankProblem::rank_two(m, vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
    let d = decompose_cofactor(&p).unwrap();
    assert_eq!(local_splitting(&p, &d, 1.0, 0.0, 0.0).unwrap(), Splitting::Mixed);
    // ρ₁ρ₂ > 0 gives a real pair, ρ₁ρ₂ < 0 a complex one
    assert_eq!(classify_point(&p, 0.1, 0.1, DEFAULT_TOL).unwrap().n_real, 2);
    assert_eq!(classify_point(&p, 0.1, -0.1, DEFAULT_TOL).unwrap().n_real, 0);
}

#[test]
fn splitting_rejects_a_simple_eigenvalue() {
    let p = ex1();
    let d = decompose_cofactor(&p).unwrap();
    assert!(local_splitting(&p, &d, -2.0, 0.5, 0.5).is_err());
}

#[test]
fn csv_and_json_export() {
    let g = phase_grid(&ex1(), Window::square(-1.0, 1.0), 3, 2, DEFAULT_TOL).unwrap();
    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert!(s.starts_with('#'));
    assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 7);
    let back: PhaseGrid = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
    assert_eq!(back, g);
    let mut svg = Vec::new();
    g.write_svg(&[], &mut svg).unwrap();
    assert!(String::from_utf8(svg).unwrap().contains("<rect"));
}

fn small_problem() -> impl Strategy<Value = LowRankProblem> {
    (2usize..6).prop_flat_map(|n| {
        (
            prop::collection::vec(-2.0f64..2.0, n * n),
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
        )
            .prop_map(move |(m, f1, g1, f2, g2)| {
                let m = DenseMatrix::from_fn(n, n, |i, j| m[i * n + j]);
                LowRankProblem::rank_two(m, f1, g1, f2, g2).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn census_parity(p in small_problem(), r1 in -3.0f64..3.0, r2 in -3.0f64..3.0) {
        let l = classify_point(&p, r1, r2, DEFAULT_TOL).unwrap();
        let n = p.n();
        prop_assert!(l.n_real <= n && l.n_rhp <= n);
        prop_assert_eq!((n - l.n_real) % 2, 0);
    }

    #[test]
    fn symmetric_rank_one_stays_real(
        a in prop::collection::vec(-2.0f64..2.0, 16),
        f in prop::collection::vec(-1.0f64..1.0, 4),
        r in -5.0f64..5.0,
    ) {
        let m = DenseMatrix::from_fn(4, 4, |i, j| a[i * 4 + j] + a[j * 4 + i]);
        let p = LowRankProblem::rank_one(m, f.clone(), f).unwrap();
        let l = classify_point(&p, r, 0.0, 1e-6).unwrap();
        prop_assert_eq!(l.n_real, 4);
    }
}
