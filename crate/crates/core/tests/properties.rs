use lasserre_gap::certificates::{bs_balance_residual, bs_objective, lift_bs_solution};
use lasserre_gap::gadgets::{audit, build_bs_instance, reduce_degree, GadgetParams};
use lasserre_gap::graph::Graph;
use lasserre_gap::lasserre::{build_psi1, certify_lift, MomentVector, Rank1Family};
use lasserre_gap::partition::{cut_edges, Cut, CutStats};
use lasserre_gap::poly::{MultilinearPoly, SubsetKey};
use lasserre_gap::scalar::{rat, rat_int, Rational};
use lasserre_gap::sdp::{canonical_form, parse_sdpa, to_sdpa_string};
use lasserre_gap::xor3::{perfect_solution_from_assignment, Xor3Instance};
use num_traits::Zero;
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (3usize..8).prop_flat_map(|n| {
        let pairs: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
            .collect();
        proptest::sample::subsequence(pairs.clone(), 0..=pairs.len())
            .prop_map(move |edges| Graph::from_edges(n, &edges).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn planted_gadget_invariants(n in 3usize..7, beta in 1i64..3, mm in 1usize..4, seed in 0u64..1000) {
        let m = n * beta as usize;
        let (inst, x) = Xor3Instance::sample_planted(n, m, seed).unwrap();
        prop_assert!(inst.constraints.iter().all(|c| c.is_satisfied(&x)));
        let h = build_bs_instance(&inst, &GadgetParams::new(rat_int(beta), mm, seed)).unwrap();
        prop_assert!(audit(&h, &inst).passed());
        prop_assert_eq!(h.num_vertices(), (2 * mm + 5) * m);
        let base = perfect_solution_from_assignment::<Rational>(&inst, &x, 3).unwrap();
        let sol = lift_bs_solution(&base, &inst, &h, 1).unwrap();
        prop_assert_eq!(bs_objective(&sol).unwrap().total, rat_int(5 * m as i64));
        let bal = bs_balance_residual(&sol, 0.0).unwrap();
        prop_assert_eq!(bal.delta, rat_int(((mm + 1) * m) as i64));
        prop_assert!(bal.residual_sq.is_zero());
        let red = reduce_degree(&h).unwrap();
        prop_assert!(red.within_bound());
        prop_assert!(audit(&red.graph, &inst).passed());
    }

    #[test]
    fn rank1_lifts_certify_their_balance(bits in proptest::collection::vec(any::<bool>(), 1..7)) {
        let n = bits.len();
        let k = bits.iter().filter(|&&b| b).count() as i64;
        let q = MultilinearPoly::sum_of_variables(n);
        let c = certify_lift(&Rank1Family { x: &bits }, &q, 0.0).unwrap();
        prop_assert!(c.accepted);
        prop_assert_eq!(c.delta, rat_int(k));
        let y = MomentVector::<Rational>::rank1_lift(&bits, 1);
        prop_assert!(y.moment_matrix(1).unwrap().min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn convex_combinations_stay_psd(
        xs in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 4), 1..4),
        ws in proptest::collection::vec(1i64..50, 4),
    ) {
        let total: i64 = ws[..xs.len()].iter().sum();
        let weights: Vec<Rational> = ws[..xs.len()].iter().map(|&w| rat(w, total)).collect();
        let lifts: Vec<_> = xs.iter().map(|x| MomentVector::<Rational>::rank1_lift(x, 2)).collect();
        let y = MomentVector::convex_combination(&weights, &lifts).unwrap();
        let mm = y.moment_matrix(2).unwrap();
        prop_assert!(mm.min_eigenvalue() >= -1e-9);
        prop_assert!(mm.union_inconsistency() == 0.0);
    }

    #[test]
    fn cut_counts_are_complement_invariant(g in graph_strategy(), code in any::<u64>()) {
        let n = g.num_vertices();
        let cut = Cut::from_code(n, code & ((1 << n) - 1));
        let a = cut_edges(&g, &cut).unwrap();
        prop_assert_eq!(a, cut_edges(&g, &cut.complement()).unwrap());
        let stats = CutStats::of(&g, &cut).unwrap();
        prop_assert!(stats.is_consistent());
        prop_assert_eq!(stats.side_a + stats.side_b, n);
    }

    #[test]
    fn sdpa_round_trip_on_random_graphs(g in graph_strategy()) {
        for (_, l) in build_psi1(&g, 0.3, 1).unwrap() {
            let p = l.to_sdp_problem().unwrap();
            let back = parse_sdpa(&to_sdpa_string(&p).unwrap()).unwrap();
            prop_assert_eq!(canonical_form(&p).unwrap(), canonical_form(&back).unwrap());
        }
    }

    #[test]
    fn subset_union_is_a_semilattice(a in proptest::collection::vec(0u32..10, 0..5), b in proptest::collection::vec(0u32..10, 0..5)) {
        let (s, t) = (SubsetKey::from_unsorted(a), SubsetKey::from_unsorted(b));
        let u = s.union(&t);
        prop_assert_eq!(&u, &t.union(&s));
        prop_assert_eq!(&u.union(&s), &u);
        prop_assert!(s.is_subset_of(&u) && t.is_subset_of(&u));
    }
}
