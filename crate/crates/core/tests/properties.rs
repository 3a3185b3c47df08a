//! Solver and generator invariants checked on randomly drawn model problems.

#![allow(clippy::needless_range_loop)]

use mpkrylov::linalg::norm2;
use mpkrylov::precond::PrecondSpec;
use mpkrylov::problems::{self, ProblemSpec, Rhs, Scheme, Wind};
use mpkrylov::solver::{expand_selective_columns, expand_selective_lincomb, Ordering, Selection};
use mpkrylov::{mp_solve, MpSolver, Preconditioner, SolverConfig, SparseMatrix, Variant};
use proptest::prelude::*;

fn arb_problem() -> impl Strategy<Value = ProblemSpec> {
    let wind = prop_oneof![
        Just(Wind::Recirculating),
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y)| Wind::Constant(x, y)),
    ];
    (4usize..=8, -2.5f64..0.0, wind, any::<bool>(), any::<u64>()).prop_map(|(grid, e, wind, upwind, seed)| {
        let mut spec = ProblemSpec::convdiff(grid, 10f64.powf(e), wind);
        spec.scheme = if upwind { Scheme::Upwind } else { Scheme::Centered };
        spec.rhs = Rhs::Random { seed };
        spec
    })
}

fn system(spec: &ProblemSpec, kinds: &[&str]) -> (SparseMatrix, Vec<f64>, Vec<Preconditioner>) {
    let (a, b) = problems::generate(spec).unwrap();
    let p = kinds
        .iter()
        .map(|k| k.parse::<PrecondSpec>().unwrap().build(&a).unwrap())
        .collect();
    (a, b, p)
}

fn fgmres(a: &SparseMatrix, b: &[f64], p: &Preconditioner, maxit: usize) -> Vec<f64> {
    let cfg = SolverConfig::new(Variant::Fgmres)
        .with_maxit(maxit)
        .with_tol(1e-12);
    mp_solve(a, b, None, std::slice::from_ref(p), &cfg)
        .unwrap()
        .residual_history
}

fn close(x: &[f64], y: &[f64], rel: f64) -> bool {
    x.len() == y.len()
        && x.iter()
            .zip(y)
            .all(|(u, v)| (u - v).abs() <= rel * u.abs().max(v.abs()).max(1e-300))
}

fn all_variant_configs() -> Vec<SolverConfig> {
    vec![
        SolverConfig::new(Variant::Gmres),
        SolverConfig::new(Variant::Fgmres),
        SolverConfig::new(Variant::FgmresCyclic),
        SolverConfig::new(Variant::MpgmresComplete).with_maxit(5),
        SolverConfig::new(Variant::MpgmresSelective)
            .with_alpha(0.7)
            .unwrap(),
        SolverConfig::new(Variant::MpgmresSelective).with_selection(Selection::Columns(vec![])),
        SolverConfig::new(Variant::MpgmresSelective).with_selection(Selection::RandomColumns { seed: 3 }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn complete_never_worse_than_any_single_preconditioner(spec in arb_problem()) {
        let (a, b, p) = system(&spec, &["jacobi", "ilu0"]);
        let cfg = SolverConfig::new(Variant::MpgmresComplete).with_maxit(6).with_tol(1e-12);
        let complete = mp_solve(&a, &b, None, &p, &cfg).unwrap().residual_history;
        for pi in &p {
            let single = fgmres(&a, &b, pi, 6);
            for (k, c) in complete.iter().enumerate() {
                let s = single.get(k).or(single.last()).unwrap();
                prop_assert!(*c <= s + 1e-10, "k={}: complete {:e} single {:e}", k, c, s);
            }
        }
    }

    #[test]
    fn single_preconditioner_multi_variants_reduce_to_fgmres(spec in arb_problem(), kind in prop::sample::select(vec!["jacobi", "ilu0", "ssor"])) {
        let (a, b, p) = system(&spec, &[kind]);
        let reference = fgmres(&a, &b, &p[0], 40);
        for variant in [Variant::MpgmresComplete, Variant::MpgmresSelective] {
            let cfg = SolverConfig::new(variant).with_maxit(40).with_tol(1e-12);
            let h = mp_solve(&a, &b, None, &p, &cfg).unwrap().residual_history;
            prop_assert!(close(&h, &reference, 1e-10), "{:?}\n{:?}\n{:?}", variant, h, reference);
        }
    }

    #[test]
    fn arnoldi_identity_and_orthonormality_every_iteration(spec in arb_problem()) {
        let (a, b, p) = system(&spec, &["ilu0", "jacobi"]);
        let norm_a = a.frobenius_norm();
        for cfg in all_variant_configs() {
            let maxit = cfg.maxit.min(12);
            let cfg = cfg.with_maxit(maxit).with_tol(1e-12);
            let preconds = if matches!(cfg.variant, Variant::Gmres | Variant::Fgmres) { &p[..1] } else { &p[..] };
            let mut solver = MpSolver::new(&a, &b, None, preconds, &cfg).unwrap();
            while solver.step().unwrap() {
                let z = solver.search_directions();
                let bound = 1e-10 * norm_a * z.frobenius_norm();
                prop_assert!(solver.arnoldi_residual() <= bound, "{:?} it {}", cfg.variant, solver.iteration());
                prop_assert!(solver.state().basis.orthonormality_error() <= 1e-10);
            }
        }
    }

    #[test]
    fn residual_histories_never_increase(spec in arb_problem()) {
        let (a, b, p) = system(&spec, &["ilu0", "badscale:gamma=100"]);
        for cfg in all_variant_configs() {
            let preconds = if matches!(cfg.variant, Variant::Gmres | Variant::Fgmres) { &p[..1] } else { &p[..] };
            let variant = cfg.variant;
            let h = mp_solve(&a, &b, None, preconds, &cfg.with_tol(1e-12)).unwrap().residual_history;
            for w in h.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{:?}: {:?}", variant, h);
            }
        }
    }

    #[test]
    fn duplicate_pair_grows_one_column_per_iteration(spec in arb_problem(), kind in prop::sample::select(vec!["jacobi", "ilu0"])) {
        let (a, b, p) = system(&spec, &[kind, kind]);
        let cfg = SolverConfig::new(Variant::MpgmresComplete).with_maxit(30).with_tol(1e-10);
        let report = mp_solve(&a, &b, None, &p, &cfg).unwrap();
        let cols = &report.basis_columns_history;
        for (k, w) in cols.windows(2).enumerate() {
            // An invariant Krylov subspace adds nothing, and the solve ends there.
            let breakdown = w[1] == w[0] && k + 2 == cols.len() && report.converged;
            prop_assert!(w[1] - w[0] == 1 || breakdown, "{:?} {:?}", cols, report.residual_history);
        }
        let reference = fgmres(&a, &b, &p[0], 30);
        let reference = &reference[..report.residual_history.len().min(reference.len())];
        prop_assert!(close(&report.residual_history[..reference.len()], reference, 1e-10));
    }

    #[test]
    fn ordering_changes_the_second_orthogonalized_column(spec in arb_problem()) {
        let (a, b, p) = system(&spec, &["ilu0", "jacobi"]);
        let second = |ordering: Ordering| {
            let cfg = SolverConfig::new(Variant::MpgmresSelective)
                .with_alpha(0.5)
                .unwrap()
                .with_ordering(ordering)
                .with_tol(1e-14);
            let mut solver = MpSolver::new(&a, &b, None, &p, &cfg).unwrap();
            solver.step().unwrap();
            solver.step().unwrap();
            let basis = &solver.state().basis;
            (basis.col(2).to_vec(), basis.col(4).to_vec())
        };
        let (f1, f2) = second(Ordering::Forward);
        let (r1, r2) = second(Ordering::Reverse);
        for (f, r) in [(&f1, &r1), (&f2, &r2)] {
            let minus: Vec<f64> = f.iter().zip(r).map(|(x, y)| x - y).collect();
            let plus: Vec<f64> = f.iter().zip(r).map(|(x, y)| x + y).collect();
            prop_assert!(norm2(&minus).min(norm2(&plus)) > 1e-8);
        }
    }

    #[test]
    fn unit_weight_on_leading_column_equals_columns_one_one(spec in arb_problem(), steps in 1usize..5) {
        let (a, b, p) = system(&spec, &["ilu0", "ssor"]);
        let cfg = SolverConfig::new(Variant::MpgmresSelective).with_alpha(0.6).unwrap().with_tol(1e-14);
        let mut solver = MpSolver::new(&a, &b, None, &p, &cfg).unwrap();
        for _ in 0..steps {
            solver.step().unwrap();
        }
        let v_k = solver.state().newest_block();
        prop_assume!(v_k.ncols() == 2);
        let refs = [&p[0], &p[1]];
        let lincomb = expand_selective_lincomb(&refs, &v_k, &[1.0, 0.0]).unwrap();
        let (columns, clamped) = expand_selective_columns(&refs, &v_k, &[0, 0]).unwrap();
        prop_assert_eq!(clamped, 0);
        for j in 0..2 {
            prop_assert_eq!(lincomb.col(j), columns.col(j));
        }
    }

    #[test]
    fn weights_are_positional_in_the_configured_ordering(spec in arb_problem(), alpha in 0.05f64..0.95) {
        let (a, b, p) = system(&spec, &["ilu0", "badscale:gamma=100"]);
        let reversed = vec![p[1].clone(), p[0].clone()];
        let base = SolverConfig::new(Variant::MpgmresSelective).with_alpha(alpha).unwrap().with_maxit(60);
        let rev = mp_solve(&a, &b, None, &p, &base.clone().with_ordering(Ordering::Reverse)).unwrap();
        let swapped = mp_solve(&a, &b, None, &reversed, &base).unwrap();
        prop_assert_eq!(rev.residual_history, swapped.residual_history);
    }

    #[test]
    fn generated_matrices_have_nonzero_diagonals(spec in arb_problem()) {
        let (a, _) = problems::generate(&spec).unwrap();
        prop_assert!(a.diagonal().iter().all(|&d| d != 0.0));
        let mut still = spec.clone();
        still.wind = Wind::Constant(0.0, 0.0);
        let (s, _) = problems::generate(&still).unwrap();
        let dense = s.to_dense();
        for i in 0..s.n() {
            for j in 0..s.n() {
                prop_assert_eq!(dense[i][j], dense[j][i]);
            }
        }
    }

    #[test]
    fn matrix_market_round_trip_is_exact(spec in arb_problem()) {
        let (a, b) = problems::generate(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (mpath, vpath) = (dir.path().join("a.mtx"), dir.path().join("b.txt"));
        problems::write_matrix_market(&a, &mpath).unwrap();
        problems::write_vector(&b, &vpath).unwrap();
        prop_assert_eq!(problems::read_matrix_market(&mpath).unwrap(), a);
        prop_assert_eq!(problems::read_vector(&vpath).unwrap(), b);
    }
}
