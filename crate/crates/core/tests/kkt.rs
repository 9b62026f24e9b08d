use birkhoff_core::birkhoff::BirkhoffOperators;
use birkhoff_core::grid::{make_grid, GridFamily, GridSpec};
use birkhoff_core::kkt::{
    assemble, assemble_alt, permute_split, residual, AltLayout, DecisionVector, KktError, Layout,
};
use birkhoff_core::model::{builtin_problem, Jet2, OcpProblem, BUILTIN_PROBLEMS};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ops(family: GridFamily, n: usize) -> BirkhoffOperators {
    BirkhoffOperators::new(make_grid(GridSpec::new(family, n)).unwrap())
}

fn random_point(nn: usize, rng: &mut ChaCha8Rng) -> DecisionVector {
    let n = Layout::new(nn).len();
    DecisionVector::from_flat(nn, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn zero_problem() -> OcpProblem {
    OcpProblem::new(
        "zero",
        |_, _| Jet2::default(),
        |_, _| Jet2::default(),
        |_, _| Jet2::default(),
    )
}

/// Every first and second partial is nonzero away from the axes.
fn generic_problem() -> OcpProblem {
    OcpProblem::new(
        "generic",
        |x, u| Jet2 {
            value: x * x * u + u * u * u + x * x * x,
            d_p: 2.0 * x * u + 3.0 * x * x,
            d_q: x * x + 3.0 * u * u,
            d_pp: 2.0 * u + 6.0 * x,
            d_pq: 2.0 * x,
            d_qq: 6.0 * u,
        },
        |xa, xb| Jet2 {
            value: xa * xb + xb * xb,
            d_p: xb,
            d_q: xa + 2.0 * xb,
            d_pp: 0.0,
            d_pq: 1.0,
            d_qq: 2.0,
        },
        |xa, xb| Jet2 {
            value: xa * xa + xb,
            d_p: 2.0 * xa,
            d_q: 1.0,
            d_pp: 2.0,
            d_pq: 0.0,
            d_qq: 0.0,
        },
    )
}

/// Central-difference Jacobian of the residual, one column per unknown.
fn fd_jacobian(chi: &DecisionVector, problem: &OcpProblem, ops: &BirkhoffOperators) -> DMatrix<f64> {
    let n = chi.len();
    let mut j = DMatrix::zeros(n, n);
    for c in 0..n {
        let h = 1e-5 * chi.as_slice()[c].abs().max(1.0);
        let mut plus = chi.clone();
        plus.as_mut_slice()[c] += h;
        let mut minus = chi.clone();
        minus.as_mut_slice()[c] -= h;
        let fp = residual(&plus, problem, ops).unwrap();
        let fm = residual(&minus, problem, ops).unwrap();
        for r in 0..n {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    j
}

fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn jacobian_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut problems: Vec<OcpProblem> = BUILTIN_PROBLEMS
        .iter()
        .map(|p| builtin_problem(p).unwrap())
        .collect();
    problems.push(generic_problem());
    for problem in &problems {
        for family in [GridFamily::ChebyshevLobatto, GridFamily::LegendreLobatto] {
            for n in [4, 8, 16] {
                let ops = ops(family, n);
                for _ in 0..5 {
                    let chi = random_point(ops.n_nodes(), &mut rng);
                    let a = assemble(&chi, problem, &ops).unwrap().to_dense().unwrap();
                    let fd = fd_jacobian(&chi, problem, &ops);
                    let rel = inf_norm(&(&a - &fd)) / inf_norm(&fd).max(1e-8);
                    assert!(rel <= 1e-6, "{} {family} N={n}: {rel:e}", problem.name());
                }
            }
        }
    }
}

#[test]
fn directional_derivative_matches_matvec() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let problem = builtin_problem("tp2").unwrap();
    let ops = ops(GridFamily::LegendreLobatto, 12);
    let chi = random_point(ops.n_nodes(), &mut rng);
    let d: Vec<f64> = (0..chi.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let h = 1e-6;
    let shifted = |s: f64| {
        let data = chi.as_slice().iter().zip(&d).map(|(c, di)| c + s * di).collect();
        DecisionVector::from_flat(chi.n_nodes(), data).unwrap()
    };
    let fp = residual(&shifted(h), &problem, &ops).unwrap();
    let fm = residual(&shifted(-h), &problem, &ops).unwrap();
    let fd: Vec<f64> = fp.iter().zip(&fm).map(|(p, m)| (p - m) / (2.0 * h)).collect();
    let ad = assemble(&chi, &problem, &ops).unwrap().matvec(&d).unwrap();
    let diff: Vec<f64> = fd.iter().zip(&ad).map(|(a, b)| a - b).collect();
    assert!(max_abs(&diff) <= 1e-6 * max_abs(&fd));
}

#[test]
fn analytic_extremal_nearly_zeroes_the_residual() {
    let problem = builtin_problem("tp1").unwrap();
    let ops = ops(GridFamily::ChebyshevLobatto, 16);
    let chi = DecisionVector::from_analytic(problem.analytic().unwrap(), ops.grid());
    let f = residual(&chi, &problem, &ops).unwrap();
    assert!(max_abs(&f) <= 1e-8, "{:e}", max_abs(&f));
}

#[test]
fn zero_problem_at_origin_has_zero_residual() {
    let ops = ops(GridFamily::LegendreLobatto, 6);
    let chi = DecisionVector::zeros(ops.n_nodes());
    let f = residual(&chi, &zero_problem(), &ops).unwrap();
    assert!(f.iter().all(|&v| v == 0.0));
}

#[test]
fn identity_blocks_and_control_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let problem = generic_problem();
    let ops = ops(GridFamily::ChebyshevLobatto, 8);
    let nn = ops.n_nodes();
    let chi = random_point(nn, &mut rng);
    let k = assemble(&chi, &problem, &ops).unwrap();
    let a = k.to_dense().unwrap();
    for b in 0..4 {
        for i in 0..nn {
            assert_eq!(a[(b * nn + i, b * nn + i)], 1.0);
        }
    }
    for i in 0..nn {
        let jet = problem.dynamics(chi.x()[i], chi.u()[i]);
        assert_eq!(a[(4 * nn + i, 4 * nn + i)], chi.lambda()[i] * jet.d_qq);
        assert_eq!(k.hamiltonian_diagonals().uu[i], chi.lambda()[i] * jet.d_qq);
    }
}

#[test]
fn block_layout_of_constant_rows() {
    let problem = builtin_problem("tp1").unwrap();
    let ops = ops(GridFamily::LegendreLobatto, 7);
    let nn = ops.n_nodes();
    let l = Layout::new(nn);
    let a = assemble(&DecisionVector::zeros(nn), &problem, &ops)
        .unwrap()
        .to_dense()
        .unwrap();
    for i in 0..nn {
        for j in 0..nn {
            assert_eq!(a[(i, l.v().start + j)], -ops.ba()[(i, j)]);
            assert_eq!(a[(nn + i, l.omega().start + j)], -ops.bb()[(i, j)]);
        }
        assert_eq!(a[(i, l.xa())], -1.0);
        assert_eq!(a[(nn + i, l.lambda_b())], -1.0);
        assert_eq!(a[(l.xa(), l.v().start + i)], ops.weights()[i]);
        assert_eq!(a[(l.lambda_b(), l.omega().start + i)], -ops.weights()[i]);
    }
    assert_eq!(a[(l.xa(), l.xa())], 1.0);
    assert_eq!(a[(l.xa(), l.xb())], -1.0);
    assert_eq!(a[(l.lambda_b(), l.lambda_b())], 1.0);
    assert_eq!(a[(l.lambda_b(), l.lambda_a())], -1.0);
    assert_eq!(a[(l.xb(), l.lambda_b())], -1.0);
    assert_eq!(a[(l.lambda_a(), l.lambda_a())], 1.0);
}

#[test]
fn identity_rows_carry_nothing_else() {
    let ops = ops(GridFamily::ChebyshevLobatto, 6);
    let nn = ops.n_nodes();
    let l = Layout::new(nn);
    let a = assemble(&DecisionVector::zeros(nn), &zero_problem(), &ops)
        .unwrap()
        .to_dense()
        .unwrap();
    for i in 0..nn {
        // X and Lambda columns: identity entry plus the Hamiltonian stripes,
        // which vanish for the zero problem
        let col_x: Vec<usize> = (0..l.len()).filter(|&r| a[(r, i)] != 0.0).collect();
        assert_eq!(col_x, vec![i]);
        let col_lam: Vec<usize> = (0..l.len())
            .filter(|&r| a[(r, l.lambda().start + i)] != 0.0)
            .collect();
        assert_eq!(col_lam, vec![nn + i]);
    }
}

#[test]
fn zero_problem_has_only_the_constant_skeleton() {
    let ops = ops(GridFamily::LegendreLobatto, 9);
    let nn = ops.n_nodes();
    let a = assemble(&DecisionVector::zeros(nn), &zero_problem(), &ops)
        .unwrap()
        .to_dense()
        .unwrap();
    let nz = |m: &DMatrix<f64>| m.iter().filter(|v| **v != 0.0).count();
    let expected = 4 * nn + nz(ops.ba()) + nz(ops.bb()) + 2 * nn + 2 * nn + 6;
    assert_eq!(nz(&a), expected);
    // the control rows vanish entirely
    for i in 0..nn {
        assert!(a.row(4 * nn + i).iter().all(|v| *v == 0.0));
    }
}

#[test]
fn data_rows_follow_the_stripe_pattern() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let ops = ops(GridFamily::ChebyshevLobatto, 10);
    let nn = ops.n_nodes();
    let mut chi = random_point(nn, &mut rng);
    // keep every Hamiltonian derivative away from zero
    for v in chi.as_mut_slice() {
        *v = if *v >= 0.0 { 0.5 + *v } else { -0.5 + *v };
    }
    let a = assemble(&chi, &generic_problem(), &ops).unwrap().to_dense().unwrap();
    let expected = [
        [true, false, true, false, true],
        [true, true, false, true, true],
        [true, true, false, false, true],
    ];
    for (rb, row) in expected.iter().enumerate() {
        for (cb, &stripe) in row.iter().enumerate() {
            for i in 0..nn {
                for j in 0..nn {
                    let v = a[((2 + rb) * nn + i, cb * nn + j)];
                    if i == j && stripe {
                        assert_ne!(v, 0.0, "block ({}, {}) node {i}", rb + 3, cb + 1);
                    } else {
                        assert_eq!(v, 0.0, "block ({}, {}) at ({i}, {j})", rb + 3, cb + 1);
                    }
                }
            }
        }
    }
    let stripes = expected.iter().flatten().filter(|s| **s).count();
    assert_eq!(stripes, 10);
    // every column block is reached by some stripe
    assert!((0..5).all(|cb| expected.iter().any(|r| r[cb])));
}

#[test]
fn matvec_reproduces_dense_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ops = ops(GridFamily::LegendreLobatto, 11);
    let nn = ops.n_nodes();
    let chi = random_point(nn, &mut rng);
    let k = assemble(&chi, &generic_problem(), &ops).unwrap();
    let a = k.to_dense().unwrap();
    let n = k.dim();
    assert_eq!(k.matvec(&vec![0.0; n]).unwrap(), vec![0.0; n]);
    for _ in 0..10 {
        let j = rng.gen_range(0..n);
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = k.matvec(&e).unwrap();
        for r in 0..n {
            assert_eq!(col[r], a[(r, j)], "entry ({r}, {j})");
        }
    }
}

#[test]
fn fast_matvec_matches_dense_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let ops = ops(GridFamily::ChebyshevLobatto, 32);
    let chi = random_point(ops.n_nodes(), &mut rng);
    let problem = builtin_problem("tp3").unwrap();
    let slow = assemble(&chi, &problem, &ops).unwrap();
    let fast = slow.clone().with_fast_path(true).unwrap();
    let a = slow.to_dense().unwrap();
    for _ in 0..5 {
        let v: Vec<f64> = (0..slow.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y0 = slow.matvec(&v).unwrap();
        let y1 = fast.matvec(&v).unwrap();
        let yd: Vec<f64> = (&a * nalgebra::DVector::from_vec(v.clone())).iter().copied().collect();
        let scale = max_abs(&y0);
        let d_fast: Vec<f64> = y0.iter().zip(&y1).map(|(p, q)| p - q).collect();
        let d_dense: Vec<f64> = y0.iter().zip(&yd).map(|(p, q)| p - q).collect();
        assert!(max_abs(&d_fast) <= 1e-10 * scale);
        assert!(max_abs(&d_dense) <= 1e-10 * scale);
    }
}

#[test]
fn fast_path_refused_on_legendre_grid() {
    let ops = ops(GridFamily::LegendreLobatto, 8);
    let k = assemble(&DecisionVector::zeros(9), &builtin_problem("tp1").unwrap(), &ops).unwrap();
    assert!(k.with_fast_path(true).is_err());
}

#[test]
fn newton_direction_product_matches_dense() {
    let problem = builtin_problem("tp1").unwrap();
    let ops = ops(GridFamily::ChebyshevLobatto, 12);
    let star = DecisionVector::from_analytic(problem.analytic().unwrap(), ops.grid());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let perturbed: Vec<f64> = star
        .as_slice()
        .iter()
        .map(|v| v + 0.05 * rng.gen_range(-1.0..1.0))
        .collect();
    let chi = DecisionVector::from_flat(star.n_nodes(), perturbed).unwrap();
    let d: Vec<f64> = star.as_slice().iter().zip(chi.as_slice()).map(|(s, c)| s - c).collect();
    let k = assemble(&chi, &problem, &ops).unwrap();
    let y = k.matvec(&d).unwrap();
    let yd = k.to_dense().unwrap() * nalgebra::DVector::from_vec(d);
    let diff: Vec<f64> = y.iter().zip(yd.iter()).map(|(a, b)| a - b).collect();
    assert!(max_abs(&diff) <= 1e-12 * max_abs(&y).max(1.0));
}

#[test]
fn dimension_mismatches_are_rejected() {
    let ops = ops(GridFamily::ChebyshevLobatto, 4);
    let p = builtin_problem("tp1").unwrap();
    let wrong = DecisionVector::zeros(7);
    assert!(matches!(residual(&wrong, &p, &ops), Err(KktError::Dimension { .. })));
    assert!(matches!(assemble(&wrong, &p, &ops), Err(KktError::Dimension { .. })));
    let k = assemble(&DecisionVector::zeros(5), &p, &ops).unwrap();
    assert!(k.matvec(&[1.0; 3]).is_err());
    assert!(DecisionVector::from_flat(5, vec![0.0; 29]).is_err());
}

#[test]
fn dense_cap_is_enforced() {
    let ops = ops(GridFamily::ChebyshevLobatto, 8);
    let k = assemble(&DecisionVector::zeros(9), &builtin_problem("tp1").unwrap(), &ops).unwrap();
    assert!(matches!(k.to_dense_capped(49), Err(KktError::DenseCap { n: 50, cap: 49 })));
    assert!(k.to_dense_capped(50).is_ok());
}

#[test]
fn split_row_counts_and_round_trip() {
    let ops = ops(GridFamily::ChebyshevLobatto, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let chi = random_point(9, &mut rng);
    let k = assemble(&chi, &builtin_problem("tp2").unwrap(), &ops).unwrap();
    let s = permute_split(&k).unwrap();
    assert_eq!((s.a0.nrows(), s.adata.nrows()), (20, 30));
    assert_eq!(s.unpermute(), k.to_dense().unwrap());
    let mut seen = s.permutation().to_vec();
    seen.sort_unstable();
    assert_eq!(seen, (0..50).collect::<Vec<_>>());
}

#[test]
fn grid_rows_do_not_depend_on_problem_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for family in [GridFamily::ChebyshevLobatto, GridFamily::LegendreLobatto] {
        let ops = ops(family, 10);
        let chi = random_point(ops.n_nodes(), &mut rng);
        let tp1 = assemble(&chi, &builtin_problem("tp1").unwrap(), &ops).unwrap();
        let tp2 = assemble(&chi, &builtin_problem("tp2").unwrap(), &ops).unwrap();
        let other = assemble(&random_point(ops.n_nodes(), &mut rng), &generic_problem(), &ops).unwrap();
        let a0 = permute_split(&tp1).unwrap().a0;
        assert_eq!(a0, permute_split(&tp2).unwrap().a0);
        assert_eq!(a0, permute_split(&other).unwrap().a0);
    }
}

#[test]
fn symmetric_alternative_hessian() {
    let problem = builtin_problem("tp1").unwrap();
    let ops = ops(GridFamily::ChebyshevLobatto, 8);
    let chi = DecisionVector::from_analytic(problem.analytic().unwrap(), ops.grid());
    let at = assemble_alt(&chi, &problem, &ops).unwrap();
    assert_eq!(at.nrows(), 5 * 9 + 4);
    assert_eq!(at.nrows(), assemble(&chi, &problem, &ops).unwrap().dim() - 1);
    let asym = (&at - at.transpose()).amax();
    assert!(asym <= 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for p in [generic_problem(), builtin_problem("tp3").unwrap()] {
        let at = assemble_alt(&random_point(9, &mut rng), &p, &ops).unwrap();
        assert!((&at - at.transpose()).amax() <= 1e-12);
    }
}

#[test]
fn alternative_hessian_of_zero_problem_is_the_skeleton() {
    let ops = ops(GridFamily::LegendreLobatto, 6);
    let nn = ops.n_nodes();
    let l = AltLayout::new(nn);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let at = assemble_alt(&random_point(nn, &mut rng), &zero_problem(), &ops).unwrap();
    for i in 0..nn {
        for j in 0..nn {
            for (r, c) in [(l.x(), l.x()), (l.x(), l.u()), (l.u(), l.u()), (l.x(), l.lambda()), (l.u(), l.lambda())] {
                assert_eq!(at[(r + i, c + j)], 0.0);
                assert_eq!(at[(c + j, r + i)], 0.0);
            }
            assert_eq!(at[(l.v() + i, l.omega() + j)], ops.bb()[(i, j)]);
        }
        assert_eq!(at[(l.x() + i, l.omega() + i)], 1.0);
        assert_eq!(at[(l.v() + i, l.lambda() + i)], -1.0);
        assert_eq!(at[(l.omega() + i, l.xa())], -ops.weights()[i]);
        assert_eq!(at[(l.lambda_b(), l.v() + i)], 1.0);
    }
    assert_eq!(at[(l.xa(), l.lambda_b())], 1.0);
    assert_eq!(at[(l.xb(), l.lambda_b())], -1.0);
    assert_eq!(at[(l.nu(), l.nu())], 0.0);
}

#[test]
fn hamiltonian_storage_report() {
    let ops = ops(GridFamily::ChebyshevLobatto, 8);
    let k = assemble(&DecisionVector::zeros(9), &builtin_problem("tp1").unwrap(), &ops).unwrap();
    let r = k.nnz_report(1, 1).unwrap();
    assert_eq!(r.hamiltonian_values, 45);
    assert_eq!(r.bytes, 360);
    assert_eq!(k.hamiltonian_diagonals().stored_values(), 45);
    assert_eq!(r.total_pattern, k.pattern_count());
    assert_eq!(k.nnz_report(6, 3).unwrap().hamiltonian_values, 117 * 9);
    assert!(k.nnz_report(0, 1).is_err());
    assert_eq!(birkhoff_core::complexity::hamiltonian_storage(1, 1, 1), Some(5));
}

#[test]
fn changing_one_control_touches_only_its_node() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let ops = ops(GridFamily::LegendreLobatto, 9);
    let nn = ops.n_nodes();
    let l = Layout::new(nn);
    let problem = generic_problem();
    let chi = random_point(nn, &mut rng);
    let base = assemble(&chi, &problem, &ops).unwrap().to_dense().unwrap();
    for k in [0, 4, nn - 1] {
        let mut moved = chi.clone();
        moved.as_mut_slice()[l.u().start + k] += 0.3;
        let a = assemble(&moved, &problem, &ops).unwrap().to_dense().unwrap();
        let rows = [2 * nn + k, 3 * nn + k, 4 * nn + k];
        let cols = [l.x().start + k, l.lambda().start + k, l.u().start + k];
        for r in 0..l.len() {
            for c in 0..l.len() {
                if a[(r, c)] != base[(r, c)] {
                    assert!(rows.contains(&r) && cols.contains(&c), "({r}, {c}) moved for node {k}");
                }
            }
        }
    }
}

#[test]
fn hessian_is_not_symmetric() {
    let problem = builtin_problem("tp1").unwrap();
    for family in [GridFamily::ChebyshevLobatto, GridFamily::LegendreLobatto] {
        for n in [4, 8, 16] {
            let ops = ops(family, n);
            let chi = DecisionVector::from_analytic(problem.analytic().unwrap(), ops.grid());
            let k = assemble(&chi, &problem, &ops).unwrap();
            assert!(k.asymmetry().unwrap() > 0.5);
        }
    }
}

#[test]
fn coordinate_export_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let ops = ops(GridFamily::ChebyshevLobatto, 5);
    let k = assemble(&random_point(6, &mut rng), &generic_problem(), &ops).unwrap();
    let text = k.to_coordinate().to_mtx_string();
    let back = birkhoff_core::matrix_market::parse(&text).unwrap();
    assert_eq!(back.to_dense().unwrap(), k.to_dense().unwrap());
}

#[test]
fn decision_vector_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let chi = random_point(4, &mut rng);
    let s = serde_json::to_string(&chi).unwrap();
    let back: DecisionVector = serde_json::from_str(&s).unwrap();
    assert_eq!(back, chi);
    let ragged = s.replacen("\"u\":[", "\"u\":[0.5,", 1);
    assert!(serde_json::from_str::<DecisionVector>(&ragged).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matvec_is_linear(seed in any::<u64>(), a in -3.0..3.0f64, n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ops = ops(GridFamily::ChebyshevLobatto, n);
        let k = assemble(&random_point(n + 1, &mut rng), &generic_problem(), &ops).unwrap();
        let x: Vec<f64> = (0..k.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..k.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let comb: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let lhs = k.matvec(&comb).unwrap();
        let ax = k.matvec(&x).unwrap();
        let ay = k.matvec(&y).unwrap();
        for i in 0..k.dim() {
            let rhs = a * ax[i] + ay[i];
            prop_assert!((lhs[i] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs() + ax[i].abs() * a.abs()));
        }
    }

    #[test]
    fn residual_is_affine_in_virtual_controls(seed in any::<u64>(), n in 2usize..10) {
        // F is linear in (V, Omega) with the constant Jacobian columns
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ops = ops(GridFamily::LegendreLobatto, n);
        let nn = n + 1;
        let l = Layout::new(nn);
        let problem = generic_problem();
        let chi = random_point(nn, &mut rng);
        let mut moved = chi.clone();
        let j = rng.gen_range(l.v().start..l.omega().end);
        moved.as_mut_slice()[j] += 1.0;
        let f0 = residual(&chi, &problem, &ops).unwrap();
        let f1 = residual(&moved, &problem, &ops).unwrap();
        let a = assemble(&chi, &problem, &ops).unwrap().to_dense().unwrap();
        for r in 0..l.len() {
            prop_assert!((f1[r] - f0[r] - a[(r, j)]).abs() <= 1e-12 * (1.0 + f0[r].abs()));
        }
    }
}
