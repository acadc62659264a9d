use clustalg::chebyshev::{c_small, Form};
use clustalg::dyck::CountEngine;
use clustalg::expansion::{
    check_context, check_divisibility, expand_compatible, expand_split, expand_tau, expand_word, family_counts,
    l_max, l_set, m_f, m_f_brute, min_spectator_exponent, rewrite_to_t, single_path_counts, sweep,
    verify_positivity, CheckOptions, ExpansionContext, ExpansionError, Grid, LEntry, Method, PositivityOptions,
    RankTwoOracle,
};
use clustalg::laurent::LaurentPoly;
use clustalg::seed::{ExchangeMatrix, MutationWord};
use clustalg::Exec;
use proptest::prelude::*;

fn all_checks() -> CheckOptions {
    CheckOptions { single_path: true, ..CheckOptions::default() }
}

fn check(r: i64, n: i64, p: i64, q: i64, specs: Vec<(i64, i64)>) {
    let ctx = ExpansionContext::new(r, n, p, q, specs).unwrap();
    let mut oracle = RankTwoOracle::new(&ctx).unwrap();
    let rep = check_context(&ctx, &mut oracle, all_checks(), Exec::Sequential).unwrap();
    assert!(rep.passes(), "{rep:?}");
}

#[test]
fn rank_three_five_seeds() {
    check(3, 5, 1, 0, vec![]);
    let ctx = ExpansionContext::new(3, 5, 1, 0, vec![]).unwrap();
    let full = expand_compatible(&ctx, CountEngine::Enumerate, Exec::Sequential).unwrap();
    let single = single_path_counts(&ctx, CountEngine::Enumerate, Exec::Sequential).unwrap();
    assert_eq!(single.values().sum::<num_bigint::BigInt>(), full.counts.values().sum());
}

#[test]
fn kronecker_five_seeds_tau() {
    let ctx = ExpansionContext::new(2, 5, 1, 0, vec![]).unwrap();
    let mut oracle = RankTwoOracle::new(&ctx).unwrap();
    let tau = expand_tau(&ctx).unwrap();
    assert_eq!(tau.poly, oracle.at_mu1(1, 0));
    assert_eq!(rewrite_to_t(&ctx, &tau.poly).unwrap(), oracle.at_t(1, 0));
}

#[test]
fn three_seeds_is_two_exchanges() {
    // x1 -> x1~ -> x2': with no spectators x2' = (x1~^r + 1) / x2
    for r in 1..=3 {
        let ctx = ExpansionContext::new(r, 3, 0, 1, vec![]).unwrap();
        let tau = expand_tau(&ctx).unwrap();
        let want = LaurentPoly::parse(ctx.table_mu1(), &format!("x1~^{r}*x2^-1 + x2^-1")).unwrap();
        let mut oracle = RankTwoOracle::new(&ctx).unwrap();
        assert_eq!(oracle.at_mu1(0, 1), want, "r={r}");
        assert_eq!(tau.poly, want, "r={r}");
    }
}

#[test]
fn kronecker_four_seeds_split() {
    let ctx = ExpansionContext::new(2, 4, 1, 0, vec![]).unwrap();
    let split = expand_split(&ctx, CountEngine::Auto, Exec::Sequential).unwrap();
    let pairs = expand_compatible(&ctx, CountEngine::Auto, Exec::Sequential).unwrap();
    assert_eq!(split.combined(&ctx).unwrap(), pairs.poly);
    assert!(split.f1.is_nonneg() && split.f2.is_nonneg());
}

#[test]
fn two_seeds_split_is_all_f1() {
    for r in 1..=3 {
        let ctx = ExpansionContext::new(r, 2, 1, 0, vec![(1, -1)]).unwrap();
        let split = expand_split(&ctx, CountEngine::Auto, Exec::Sequential).unwrap();
        assert!(split.f2.is_zero());
        assert!(!split.f1.is_zero());
    }
}

#[test]
fn spectators_and_frozen_rows() {
    check(2, 5, 1, 1, vec![(1, 2), (-2, 1)]);
    check(3, 4, 2, 0, vec![(2, -1)]);
    check(1, 6, 1, 2, vec![(-1, -1), (2, 2)]);
}

#[test]
fn rank_one_reduces_past_five() {
    for n in 2..=11 {
        check(1, n, 1, 1, vec![(1, -1)]);
    }
    let ctx = ExpansionContext::new(1, 7, 1, 0, vec![]).unwrap();
    assert!(ctx.reduced().is_some_and(|c| c.n() < 7));
}

#[test]
fn m_f_examples() {
    let ctx = ExpansionContext::new(2, 5, 1, 1, vec![(0, 0), (1, 0)]).unwrap();
    assert_eq!(m_f(&ctx, 0), 0);
    let counts = family_counts(&ctx, CountEngine::Enumerate, Exec::Sequential).unwrap();
    let brute = m_f_brute(&ctx, &counts, 1);
    assert_eq!(m_f(&ctx, 1), brute);
    // ξ_f = 1, ω_f = 0: the minimum takes S1 full, so it lies in [0, A_{n-1}]
    assert!(brute >= 0 && brute <= ctx.a(ctx.n() - 1), "{brute}");
}

#[test]
fn m_f_matches_brute_force_exhaustively() {
    for r in 1..=3 {
        for n in 2..=5 {
            for (p, q) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
                let specs: Vec<(i64, i64)> =
                    (-2..=2).flat_map(|x| (-2..=2).map(move |w| (x, w))).collect();
                let ctx = ExpansionContext::new(r, n, p, q, specs).unwrap();
                let eff = ctx.reduced().unwrap_or(ctx);
                let counts = family_counts(&eff, CountEngine::Auto, Exec::Sequential).unwrap();
                for f in 0..eff.spectators().len() {
                    assert_eq!(m_f(&eff, f), m_f_brute(&eff, &counts, f), "r={r} n={n} p={p} q={q} f={f}");
                }
            }
        }
    }
}

#[test]
fn zero_tau_has_single_maximal_element() {
    for r in 1..=3 {
        for n in 4..=6 {
            let mx = l_max(r, n, &vec![0; (n - 3) as usize], 2);
            assert_eq!(mx.len(), 1);
            // c_{n-2} = 0 lets every k close the zero prefix, and the largest wins
            let want = if c_small(r, n - 2) == 0 { 2 } else { 0 };
            assert_eq!(mx[0].k, want, "r={r} n={n}");
        }
    }
}

#[test]
fn without_p_only_k_zero() {
    for e in l_set(2, 6, &[3, 1, 2], 0) {
        assert_eq!((e.k, e.s_prev, e.s_last), (0, 0, 0));
    }
}

fn below(e: &LEntry, f: &LEntry) -> bool {
    e.prefix.iter().zip(&f.prefix).all(|(a, b)| a <= b) && (e.prefix != f.prefix || e.k <= f.k)
}

proptest! {
    #[test]
    fn l_max_is_the_maximal_part(r in 1i64..=3, n in 4i64..=6, kmax in 0i64..=2, seed in prop::collection::vec(0i64..=3, 3)) {
        let prefix: Vec<i64> = seed[..(n - 3) as usize].to_vec();
        let l = l_set(r, n, &prefix, kmax);
        let mx = l_max(r, n, &prefix, kmax);
        for e in &l {
            prop_assert!(e.prefix.iter().zip(&prefix).all(|(a, b)| 0 <= *a && a <= b));
            prop_assert_eq!(e.s_prev, e.k * c_small(r, n - 2));
            prop_assert_eq!(e.s_last, e.k * c_small(r, n - 1));
            // every element sits under some maximal one
            prop_assert!(mx.iter().any(|m| below(e, m)));
        }
        for m in &mx {
            prop_assert!(l.contains(m));
            prop_assert!(!l.iter().any(|e| e != m && below(m, e)));
        }
    }

    #[test]
    fn random_contexts_match_oracle(
        r in 1i64..=3,
        n in 2i64..=6,
        p in 0i64..=2,
        q in 0i64..=1,
        specs in prop::collection::vec((-2i64..=2, -2i64..=2), 0..=2),
    ) {
        let ctx = ExpansionContext::new(r, n, p, q, specs).unwrap();
        let mut oracle = RankTwoOracle::new(&ctx).unwrap();
        let rep = check_context(&ctx, &mut oracle, all_checks(), Exec::Sequential).unwrap();
        prop_assert!(rep.passes(), "{:?}", rep);
        let tau = expand_tau(&ctx).unwrap();
        prop_assert!(min_spectator_exponent(&tau.poly).is_none_or(|m| m >= 0));
    }
}

#[test]
fn sub_grid_passes_with_both_strategies() {
    let grid = Grid { rs: vec![1, 2, 3], ns: (2..=5).collect(), max_pq: 2, max_spectators: 1, bound: 1 };
    let par = sweep(&grid, all_checks(), Exec::Parallel).unwrap();
    let seq = sweep(&grid, all_checks(), Exec::Sequential).unwrap();
    assert_eq!(par.len(), 3 * 4 * 6 * 10);
    assert!(par.iter().all(|r| r.passes()));
    assert_eq!(serde_json::to_string(&par).unwrap(), serde_json::to_string(&seq).unwrap());
}

fn ceil_div(a: i64, b: i64) -> i64 {
    (a + b - 1).div_euclid(b)
}

#[test]
fn divisibility_small_grid() {
    for r in 2..=3 {
        for n in 2..=5 {
            for (p, q) in [(1, 0), (0, 1), (1, 1), (2, 1)] {
                for form in [Form::First, Form::Second] {
                    let (pp, qq) = form.leading(p, q);
                    let an = pp * c_small(r, n + 1) + qq * c_small(r, n);
                    let a0 = ceil_div(an, r);
                    for a in a0..=a0 + 1 {
                        let out = check_divisibility(r, n, p, q, form, a).unwrap();
                        assert!(out.passes(), "r={r} n={n} p={p} q={q} {form:?} a={a}");
                        assert_eq!(out.exponent, r * a - an);
                    }
                    let short = check_divisibility(r, n, p, q, form, a0 - 1);
                    assert!(matches!(short, Err(ExpansionError::SmallA { .. })));
                }
            }
        }
    }
}

#[test]
fn positivity_reports() {
    let markov = ExchangeMatrix::square(vec![vec![0, 2, -2], vec![-2, 0, 2], vec![2, -2, 0]]).unwrap();
    let empty = verify_positivity(&markov, &MutationWord::default(), PositivityOptions::default()).unwrap();
    assert!(empty.passes() && empty.steps_done == 0);
    let w = MutationWord::from_one_based(&[1, 2, 3, 1, 2, 1]).unwrap();
    let rep = verify_positivity(&markov, &w, PositivityOptions::default()).unwrap();
    assert!(rep.passes(), "{rep:?}");
    let tail = rep.tail.unwrap();
    assert_eq!(tail.directions, (1, 2));
    assert!(tail.skipped.is_none() && !tail.checks.is_empty());
    let cut = PositivityOptions { size_budget_log2: Some(4.0), ..PositivityOptions::default() };
    let rep = verify_positivity(&markov, &w, cut).unwrap();
    assert!(rep.no_failures() && !rep.passes());
    assert!(rep.steps_done < w.len() && rep.stopped_at_bound.unwrap() > 4.0);
}

#[test]
fn word_expansion_with_single_letter() {
    let kron = ExchangeMatrix::square(vec![vec![0, 2], vec![-2, 0]]).unwrap();
    let w = MutationWord::new([0]);
    let truth = expand_word(&kron, &w, 1, 0, Method::Oracle, Exec::Sequential).unwrap().poly;
    for m in Method::ALL {
        assert_eq!(expand_word(&kron, &w, 1, 0, m, Exec::Sequential).unwrap().poly, truth, "{m:?}");
    }
}
