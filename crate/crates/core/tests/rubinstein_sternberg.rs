use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_atlas::kernel::{eig_dense, elliptic_k_e};
use spectral_atlas::rs::*;
use spectral_atlas::{Polynomial, C64};

fn moving_pair_dense(op: &DiscretizedOperator, rho: f64) -> Vec<C64> {
    eig_dense(&op.assemble_perturbed(rho)).unwrap().values
}

fn count(values: &[C64], pred: impl Fn(f64) -> bool) -> usize {
    values.iter().filter(|z| pred(z.re)).count()
}

fn scale(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

// adaptive 5-point Gauss-Legendre, used as an independent quadrature
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    const X: [f64; 5] = [0.0, 0.5384693101056831, -0.5384693101056831, 0.906179845938664, -0.906179845938664];
    const W: [f64; 5] = [
        0.5688888888888889,
        0.47862867049936647,
        0.47862867049936647,
        0.23692688505618908,
        0.23692688505618908,
    ];
    let gl = |a: f64, b: f64| {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        X.iter().zip(W).map(|(x, w)| w * r * f(c + r * x)).sum::<f64>()
    };
    let m = 0.5 * (a + b);
    let (whole, halves) = (gl(a, b), gl(a, m) + gl(m, b));
    if depth == 0 || (whole - halves).abs() <= tol * halves.abs().max(1e-300) {
        return halves;
    }
    adaptive(f, a, m, tol, depth - 1) + adaptive(f, m, b, tol, depth - 1)
}

// P, R and ∫|f|/√Φ straight from 2E + 2κu − 2F(u), without deflation
fn oracle_p_r(nl: &Nonlinearity, e: f64, kappa: f64) -> (f64, f64, f64) {
    let (lo, hi) = turning_points(nl, e, kappa).unwrap();
    let phi = nl.phi(e, kappa);
    let w = hi - lo;
    let dens = |t: f64| {
        let (s, c) = t.sin_cos();
        let u = lo + w * s * s;
        (2.0 * w * s * c / phi.eval(u).sqrt(), u)
    };
    let p = adaptive(&|t| dens(t).0, 0.0, std::f64::consts::FRAC_PI_2, 1e-13, 16);
    let r = adaptive(
        &|t| {
            let (d, u) = dens(t);
            d * nl.f(u)
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-13,
        16,
    );
    let r_abs = adaptive(
        &|t| {
            let (d, u) = dens(t);
            d * nl.f(u).abs()
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-13,
        16,
    );
    (p, r, r_abs)
}

#[test]
fn lambda1_closed_form_against_the_discretised_operator() {
    for k in [0.2, 0.5, 0.8] {
        let l1 = lambda1(k).unwrap();
        let op = CubicFront::new(k).unwrap().operator(4000, Ends::Neumann).unwrap();
        let fd = op.perturbed_eigenvalue_near(1.0, l1 + 0.01).unwrap();
        assert!((fd - l1).abs() < 1e-3, "k={k}: {fd} vs {l1}");
        assert!(op.secular(1.0, fd).unwrap().abs() < 1e-6);
    }
}

#[test]
fn lambda1_is_negative_and_tends_to_minus_three() {
    for i in 1..=19 {
        let k = 0.05 * i as f64;
        assert!(lambda1(k).unwrap() < 0.0, "k={k}");
    }
    assert_eq!(lambda1(0.0).unwrap(), -3.0);
    assert!((lambda1(1e-4).unwrap() + 3.0).abs() < 1e-6);
    assert!(lambda1(1.0).is_err());
}

#[test]
fn restricted_matrix_eigenvalues() {
    for k in [0.1, 0.5, 0.9] {
        let (m, ev) = restricted_matrix(k).unwrap();
        let l1 = lambda1(k).unwrap();
        assert!(ev[0].abs() < 1e-12 && (ev[1] - l1).abs() < 1e-12);
        let tr = m[(0, 0)] + m[(1, 1)];
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert!((tr - ev[0] - ev[1]).abs() < 1e-12 && (det - ev[0] * ev[1]).abs() < 1e-12);
    }
}

#[test]
fn lame_table_matches_finite_differences() {
    let k = 0.5;
    let front = CubicFront::new(k).unwrap();
    let neu = front.operator(4000, Ends::Neumann).unwrap();
    let dir = front.operator(4000, Ends::Dirichlet).unwrap();
    let (mut in_n, mut in_d) = (0, 0);
    for m in lame_spectrum(k).unwrap() {
        let (op, idx) = match m.ends {
            Ends::Neumann => (&neu, &mut in_n),
            Ends::Dirichlet => (&dir, &mut in_d),
        };
        let fd = op.t.eigenvalue_from_top(*idx).unwrap();
        *idx += 1;
        assert!((fd - m.eigenvalue).abs() < 1e-4, "{:?}: {fd} vs {}", m.kind, m.eigenvalue);
    }
    // positive Neumann eigenvalue; translation mode is the derivative of sn
    let lame = lame_spectrum(k).unwrap();
    assert!(lame[0].eigenvalue > 0.0);
    for x in [-1.2, 0.3, 1.0] {
        let h = 1e-5;
        let du = (front.profile(x + h) - front.profile(x - h)) / (2.0 * h);
        assert!((lame[1].eval(x) - du).abs() < 1e-8);
    }
}

#[test]
fn lame_modes_solve_the_operator() {
    let k = 0.7;
    let front = CubicFront::new(k).unwrap();
    let op = front.operator(2000, Ends::Neumann).unwrap();
    for m in lame_spectrum(k).unwrap().into_iter().filter(|m| m.ends == Ends::Neumann) {
        let v: Vec<f64> = (0..=2000).map(|j| m.eval(-front.kk + j as f64 * op.h)).collect();
        let hv = op.apply_h(&v);
        let res = hv.iter().zip(&v).map(|(a, b)| (a - m.eigenvalue * b).abs()).fold(0.0, f64::max);
        assert!(res < 1e-4, "{:?}: {res}", m.kind);
    }
}

#[test]
fn discrete_operator_identities() {
    let front = CubicFront::new(0.6).unwrap();
    let op = front.operator(64, Ends::Neumann).unwrap();
    let ones = vec![1.0; op.dim()];
    let h1 = op.apply_h(&ones);
    assert!(h1.iter().zip(&op.g).all(|(a, b)| (a - b).abs() < 1e-9));
    assert!((op.mass() - 2.0 * front.kk).abs() < 1e-12);
    // W H is symmetric
    let a = op.assemble_perturbed(0.0);
    for i in 0..op.dim() {
        for j in 0..op.dim() {
            assert!((op.weights[i] * a[(i, j)] - op.weights[j] * a[(j, i)]).abs() < 1e-9);
        }
    }
    let flat = build_h_discrete(&vec![0.0; 33], 1.0, Ends::Neumann).unwrap();
    assert!(flat.t.eigenvalue_from_top(0).unwrap().abs() < 1e-10);
    assert!(flat.apply_h(&vec![1.0; 33]).iter().all(|v| v.abs() < 1e-12));
    assert!(build_h_discrete(&[0.0; 10], 1.0, Ends::Neumann).is_err());
}

#[test]
fn theorem_holds_for_the_cubic_front() {
    for k in [0.2, 0.5, 0.8] {
        let front = CubicFront::new(k).unwrap();
        let big = front.operator(4000, Ends::Neumann).unwrap().stability_index().unwrap();
        assert_eq!(big.n_plus_h, 1);
        assert!(big.inner > 0.0 && big.has_simple_kernel);
        assert_eq!(big.n_plus_perturbed, Some(0));
        let op = front.operator(200, Ends::Neumann).unwrap();
        let ev = moving_pair_dense(&op, 1.0);
        let tol = 1e-8 * scale(&ev);
        assert_eq!(count(&ev, |x| x > tol), 0, "k={k}");
        assert_eq!(ev.iter().filter(|z| z.norm() <= tol).count(), 1);
    }
}

fn planted() -> Vec<(&'static str, Nonlinearity, f64, f64, usize)> {
    vec![
        // (1 − u²)(u + 0.3), one front
        (
            "asymmetric cubic",
            Nonlinearity::new(Polynomial::new(vec![0.3, 1.0, -0.3, -1.0]), -0.3),
            0.0,
            0.0,
            1,
        ),
        // u − u⁵, two fronts
        (
            "quintic",
            Nonlinearity::new(Polynomial::new(vec![0.0, 1.0, 0.0, 0.0, 0.0, -1.0]), 0.0),
            0.25,
            0.0,
            2,
        ),
        ("cubic, three fronts", Nonlinearity::bistable(), 0.2, 0.0, 3),
    ]
}

#[test]
fn theorem_holds_for_planted_indices() {
    for (name, nl, e, kappa, fronts) in planted() {
        let prof = stationary_profile(&nl, e, kappa, fronts, 240).unwrap();
        let op = profile_operator(&nl, &prof, Ends::Neumann).unwrap();
        let si = op.stability_index().unwrap();
        assert_eq!(si.n_plus_h, fronts, "{name}");
        let ev = moving_pair_dense(&op, 1.0);
        let tol = 1e-8 * scale(&ev);
        assert_eq!(Some(count(&ev, |x| x > tol)), si.n_plus_perturbed, "{name}: {si:?}");
        assert_eq!(ev.iter().filter(|z| z.norm() <= tol).count(), 1, "{name}");
        assert!(si.has_simple_kernel);
    }
}

#[test]
fn profile_matches_the_elliptic_front() {
    let front = CubicFront::new(0.5).unwrap();
    let prof = stationary_profile(&front.nonlinearity(), 0.5, 0.0, 1, 100).unwrap();
    assert!((prof.l - front.kk).abs() < 1e-12);
    for (x, u) in prof.x.iter().zip(&prof.u) {
        assert!((u - front.profile(*x)).abs() < 1e-10, "{x}: {u}");
    }
}

#[test]
fn stability_index_edge_cases() {
    let neg = build_h_discrete(&vec![-1.0; 101], 2.0, Ends::Neumann).unwrap().stability_index().unwrap();
    assert_eq!((neg.n_plus_h, neg.n_plus_perturbed), (0, Some(0)));
    assert!(neg.inner < 0.0);
    // constant potential on the first Neumann mode: H is singular, 𝟙 is in its range
    let (n, l) = (200, 1.5);
    let h = 2.0 * l / n as f64;
    let q = 2.0 / (h * h) * (1.0 - (std::f64::consts::PI / n as f64).cos());
    let op = build_h_discrete(&vec![q; n + 1], l, Ends::Neumann).unwrap();
    let si = op.stability_index().unwrap();
    assert!(si.singular_h && !si.has_simple_kernel);
    assert_eq!(si.n_plus_h, 1);
    assert!((si.inner - 2.0 * l / q).abs() < 1e-6 * (2.0 * l / q), "{} vs {}", si.inner, 2.0 * l / q);
}

#[test]
fn crossing_rate_matches_a_rho_difference() {
    let op = CubicFront::new(0.5).unwrap().operator(800, Ends::Neumann).unwrap();
    let rate = op.crossing_rate().unwrap();
    let d = 1e-4;
    let up = op.perturbed_eigenvalue_near(1.0 + d, 0.0).unwrap();
    let down = op.perturbed_eigenvalue_near(1.0 - d, 0.0).unwrap();
    let fd = (up - down) / (2.0 * d);
    assert!(rate < 0.0 && ((fd - rate) / rate).abs() < 1e-5, "{fd} vs {rate}");
}

#[test]
fn herglotz_maps_the_upper_half_plane_to_itself() {
    let op = CubicFront::new(0.5).unwrap().operator(400, Ends::Neumann).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for rho in [0.25, 0.5, 1.0] {
        for _ in 0..40 {
            let z = C64::new(rng.gen_range(-20.0..5.0), 10f64.powf(rng.gen_range(-3.0..1.0)));
            assert!(op.herglotz_h(rho, z).unwrap().im > 0.0);
        }
    }
    assert!(op.herglotz_h(1.5, C64::new(0.0, 1.0)).is_err());
    assert!(op.herglotz_h(0.5, C64::new(0.0, 0.0)).is_err());
}

#[test]
fn herglotz_roots_are_moving_eigenvalues() {
    let op = CubicFront::new(0.5).unwrap().operator(200, Ends::Neumann).unwrap();
    let rho = 0.5;
    let ev = moving_pair_dense(&op, rho);
    let (mut moving, mut fixed) = (0, 0);
    for z in ev.iter().filter(|z| z.re > -20.0) {
        let lam = z.re;
        let unmoved = op.t.count_below(lam + 1e-7) - op.t.count_below(lam - 1e-7) == 1;
        if unmoved {
            fixed += 1;
            continue;
        }
        moving += 1;
        let h = op.herglotz_h(rho, C64::new(lam, 0.0)).unwrap();
        assert!((h * lam * rho).norm() < 1e-7, "λ = {lam}: h = {h}");
    }
    assert!(moving >= 2 && fixed >= 1, "{moving} {fixed}");
}

#[test]
fn zero_eigenvalue_only_at_rho_one() {
    let op = CubicFront::new(0.4).unwrap().operator(160, Ends::Neumann).unwrap();
    for i in 0..=30 {
        let rho = 0.05 * i as f64;
        assert!((op.secular(rho, 0.0).unwrap() - (1.0 - rho)).abs() < 1e-10);
        let ev = moving_pair_dense(&op, rho);
        let smallest = ev.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        if i == 20 {
            assert!(smallest < 1e-8 * scale(&ev));
        } else {
            assert!(smallest > 1e-3, "ρ = {rho}: {smallest}");
        }
    }
}

#[test]
fn unmoved_modes_are_odd() {
    let front = CubicFront::new(0.5).unwrap();
    let op = front.operator(400, Ends::Neumann).unwrap();
    let m = &lame_spectrum(0.5).unwrap()[2];
    let v: Vec<f64> = (0..op.dim()).map(|j| m.eval(-front.kk + j as f64 * op.h)).collect();
    assert!(op.inner(&op.g, &v).abs() < 1e-12);
    let a = op.apply_h(&v);
    let b = op.apply_perturbed(0.7, &v);
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn turning_points_cases() {
    let front = CubicFront::new(0.6).unwrap();
    let nl = front.nonlinearity();
    let (lo, hi) = turning_points(&nl, 0.5, 0.0).unwrap();
    assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    let big_f = nl.big_f();
    assert!((big_f.eval(1.0) - 0.5).abs() < 1e-14 && (big_f.eval(-1.0) - 0.5).abs() < 1e-14);
    let (lo, hi) = turning_points(&nl, 0.45, 0.0).unwrap();
    assert!(lo > -1.0 && hi < 1.0 && lo < 0.0 && hi > 0.0);
    // separatrix: E = (1+k²)²/(8k²) gives double roots
    let k2 = 0.36;
    let sep = (1.0 + k2) * (1.0 + k2) / (8.0 * k2);
    assert!(turning_points(&nl, sep, 0.0).is_err());
    assert!(turning_points(&nl, -0.1, 0.0).is_err());
}

#[test]
fn period_integrals_of_the_cubic() {
    for k in [0.2, 0.5, 0.8] {
        let nl = CubicFront::new(k).unwrap().nonlinearity();
        let (kk, _) = elliptic_k_e(k).unwrap();
        let pi = period_integrals(&nl, 0.5, 0.0).unwrap();
        assert!((pi.p - 2.0 * kk).abs() < 1e-8);
        assert!(pi.m.abs() < 1e-12 && pi.r.abs() < 1e-12);
    }
}

#[test]
fn tau_sign_and_size_match_the_inner_product() {
    let front = CubicFront::new(0.5).unwrap();
    let nl = front.nonlinearity();
    let start = FamilyPoint::at(&nl, 0.5, 0.0, 0.0).unwrap();
    let fam = trace_family(&nl, &start, 8, 0.01).unwrap();
    for pt in &fam {
        let mut local = nl.clone();
        local.well = 0.5 * (pt.mu_minus + pt.mu_plus);
        let prof = stationary_profile(&local, pt.e, pt.kappa, 1, 3000).unwrap();
        let si = profile_operator(&local, &prof, Ends::Neumann).unwrap().stability_index().unwrap();
        assert_eq!(si.inner.signum(), pt.tau.signum());
        let want = 2.0 * prof.l * pt.tau;
        assert!(((si.inner - want) / want).abs() < 1e-4, "{} vs {want}", si.inner);
    }
}

#[test]
fn traced_family_holds_the_period() {
    let front = CubicFront::new(0.5).unwrap();
    let nl = front.nonlinearity();
    let start = FamilyPoint::at(&nl, 0.5, 0.0, 0.0).unwrap();
    let fam = trace_family(&nl, &start, 100, 0.002).unwrap();
    assert_eq!(fam.len(), 101);
    for pt in &fam {
        assert!((pt.p - 2.0 * front.kk).abs() < 1e-8);
        assert!((pt.kappa * pt.p - pt.r).abs() <= 1e-8 * pt.r.abs() + 1e-12);
        assert!(pt.tau > 0.0);
    }
    // mass varies monotonically, so it parameterises the family
    let dm: Vec<f64> = fam.windows(2).map(|w| w[1].m - w[0].m).collect();
    assert!(dm.iter().all(|d| *d > 0.0) || dm.iter().all(|d| *d < 0.0));
    // (1/2L) dR/ds ⟨𝟙,H⁻¹𝟙⟩ = dM/ds, with ⟨𝟙,H⁻¹𝟙⟩ = 2Lτ
    for w in fam.windows(3).step_by(20) {
        let dr = (w[2].r - w[0].r) / (w[2].s - w[0].s);
        let dmds = (w[2].m - w[0].m) / (w[2].s - w[0].s);
        assert!((dr * w[1].tau - dmds).abs() < 1e-4 * dmds.abs());
    }
    // reversing the step retraces the path
    let back = trace_family(&nl, fam.last().unwrap(), 100, -0.002).unwrap();
    let end = back.last().unwrap();
    assert!((end.e - start.e).abs() < 1e-6 && (end.kappa - start.kappa).abs() < 1e-6);
}

#[test]
fn tau_survives_rescaling_of_u() {
    // u = c w maps f(u) to f(c w)/c in w; τ = dM/dR is unchanged
    let nl = Nonlinearity::bistable();
    let c: f64 = 2.0;
    let scaled = Nonlinearity::new(Polynomial::new(vec![0.0, 1.0, 0.0, -c * c]), 0.0);
    let t1 = tau(&nl, 0.2, 0.01).unwrap();
    let t2 = tau(&scaled, 0.2 / (c * c), 0.01 / c).unwrap();
    assert!((t1 - t2).abs() < 1e-6 * t1.abs(), "{t1} {t2}");
}

#[test]
fn eigenvalues_are_real_for_rho_in_the_unit_interval() {
    let op = CubicFront::new(0.5).unwrap().operator(200, Ends::Neumann).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let rho: f64 = rng.gen_range(0.0..=1.0);
        let ev = moving_pair_dense(&op, rho);
        let im = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(im <= 1e-7 * scale(&ev), "ρ = {rho}: {im}");
    }
}

fn random_quartic_family() -> impl Strategy<Value = (Nonlinearity, f64, f64)> {
    (-0.5f64..0.5, -0.5f64..0.5, 0.5f64..2.0, -0.5f64..0.5, 0.3f64..2.0, 0.1f64..0.6).prop_map(
        |(w, kappa, a, b, c, frac)| {
            // f(u) = κ + a s + b s² − c s³ with s = u − w, so u = w is a well of F − κu
            let f = Polynomial::new(vec![
                kappa - a * w + b * w * w + c * w * w * w,
                a - 2.0 * b * w - 3.0 * c * w * w,
                b + 3.0 * c * w,
                -c,
            ]);
            let nl = Nonlinearity::new(f, w);
            let v = |u: f64| nl.big_f().eval(u) - kappa * u;
            let disc = (b * b + 4.0 * a * c).sqrt();
            let barrier = [(b + disc) / (2.0 * c), (b - disc) / (2.0 * c)].map(|s| v(w + s) - v(w));
            let e = v(w) + frac * barrier[0].min(barrier[1]);
            (nl, e, kappa)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kappa_p_equals_r((nl, e, kappa) in random_quartic_family()) {
        let pi = period_integrals(&nl, e, kappa).unwrap();
        let (p, r, r_abs) = oracle_p_r(&nl, e, kappa);
        // the undeflated oracle is only good to ~1e-10 of the integrand's size, which matters when R ≈ 0
        prop_assert!((kappa * p - r).abs() <= 1e-8 * r.abs().max(r_abs), "κP = {} R = {r}", kappa * p);
        prop_assert!((pi.p - p).abs() <= 1e-8 * p);
        prop_assert!((kappa * pi.p - pi.r).abs() <= 1e-8 * pi.r.abs() + 1e-12);
    }

    #[test]
    fn theorem_consistency_over_k(k in 0.1f64..0.9) {
        let op = CubicFront::new(k).unwrap().operator(400, Ends::Neumann).unwrap();
        let si = op.stability_index().unwrap();
        prop_assert_eq!(si.n_plus_h, 1);
        prop_assert!(si.inner > 0.0);
        prop_assert_eq!(si.n_plus_perturbed, Some(0));
        let l1 = lambda1(k).unwrap();
        prop_assert!((op.perturbed_eigenvalue_near(1.0, l1 + 0.01).unwrap() - l1).abs() < 5e-3);
    }

    #[test]
    fn from_length_inverts_the_length(k in 0.05f64..0.95) {
        let l = CubicFront::new(k).unwrap().length();
        let back = CubicFront::from_length(l).unwrap();
        prop_assert!((back.k - k).abs() < 1e-10);
    }
}
