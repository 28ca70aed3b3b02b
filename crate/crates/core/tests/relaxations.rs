use lasserre_gap::graph::Graph;
use lasserre_gap::lasserre::{build_lifted_sdp, build_psi1, build_psi2, solve_family};
use lasserre_gap::poly::{BinaryProgram, ConstraintKind, MultilinearPoly, Sense};
use lasserre_gap::scalar::rat_int;
use lasserre_gap::sdp::{SolveStatus, SolverOptions};

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn triangle_balanced_family() {
    let fam = build_psi1(&Graph::complete(3), 1.0 / 3.0, 1).unwrap();
    let s = solve_family(&fam, &opts()).unwrap();
    assert!(s.all_converged());
    for (_, m) in &s.members {
        assert!((m.value - 2.0).abs() <= 1e-6, "{}", m.value);
    }
}

#[test]
fn single_edge_families() {
    let edge = Graph::path(2);
    let s = solve_family(&build_psi1(&edge, 0.4, 1).unwrap(), &opts()).unwrap();
    assert!((s.value() - 1.0).abs() <= 1e-6);
    let s = solve_family(&build_psi2(&edge, 1).unwrap(), &opts()).unwrap();
    assert!((s.value() - 1.0).abs() <= 1e-6);
}

#[test]
fn path_sparsest_cut_relaxation_below_integral() {
    let s = solve_family(&build_psi2(&Graph::path(3), 1).unwrap(), &opts()).unwrap();
    assert!(s.all_converged());
    assert!(s.value() <= 0.5 + 1e-6, "{}", s.value());
}

#[test]
fn four_cycle_equality_program() {
    let edges = [(0, 1), (1, 2), (2, 3), (3, 0)];
    let cut = MultilinearPoly::cut_polynomial(4, &edges).unwrap();
    let q = MultilinearPoly::sum_of_variables(4)
        .linear_combination(
            &rat_int(1),
            &MultilinearPoly::constant(4, rat_int(1)),
            &rat_int(-2),
        )
        .unwrap();
    let prog = BinaryProgram::new(cut, q, ConstraintKind::Equality, Sense::Minimize).unwrap();
    let brute = prog.brute_force().unwrap().unwrap().0;
    let l = build_lifted_sdp(&prog, 2).unwrap();
    let s = l.solve(&opts()).unwrap();
    assert_eq!(s.solution.status, SolveStatus::Converged);
    let b: f64 = num_traits::ToPrimitive::to_f64(&brute).unwrap();
    assert!((s.value - b).abs() <= 1e-6, "{} vs {}", s.value, b);
}

#[test]
fn second_round_tightens_ten_cycle() {
    let g = Graph::cycle(10);
    let s1 = solve_family(&build_psi1(&g, 0.3, 1).unwrap(), &opts()).unwrap();
    let s2 = solve_family(&build_psi1(&g, 0.3, 2).unwrap(), &opts()).unwrap();
    assert!(s1.all_converged() && s2.all_converged());
    assert!(
        s2.value() >= s1.value() - 1e-6,
        "{} < {}",
        s2.value(),
        s1.value()
    );
    assert!(s2.value() <= 2.0 + 1e-6);
    assert!(s1.value() < 1.0);
}
