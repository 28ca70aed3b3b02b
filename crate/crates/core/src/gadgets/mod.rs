//! Gap instances: H_Φ from a 3-XOR instance, its degree reduction, the
//! Uniform Sparsest Cut augmentation, and the expanders they rely on.

mod audit;
mod build;
mod expander;
mod graph;

pub use audit::{audit, AuditReport};
pub use build::{
    build_bs_instance, build_usc_instance, left_rep_degrees, reduce_degree, Reduction,
    ZR_ATTACH_DEGREE,
};
pub use expander::{
    brute_force_expansion, build_expander, random_regular, regular_multigraph, sample_expander,
    second_eigenvalue, second_eigenvalue_estimate, CertificateMethod, ExpanderCertificate,
    BRUTE_FORCE_LIMIT, DENSE_SPECTRAL_LIMIT, MAX_ATTEMPTS,
};
pub use graph::{
    role_kind, EdgeTag, GadgetEdge, GadgetGraph, GadgetParams, Layout, NamedCertificate, Stage,
    VertexRole, DEFAULT_DEGREE_FACTOR, DEFAULT_D_SCALE,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use crate::xor3::{Xor3Instance, XorConstraint};

    fn planted(n: usize, beta: i64, mm: usize, seed: u64) -> (Xor3Instance, GadgetGraph) {
        let (inst, _) = Xor3Instance::sample_planted(n, n * beta as usize, seed).unwrap();
        let g = build_bs_instance(&inst, &GadgetParams::new(rat_int(beta), mm, seed)).unwrap();
        (inst, g)
    }

    #[test]
    fn small_instance_counts() {
        let (inst, g) = planted(4, 2, 2, 3);
        assert_eq!(g.num_vertices(), 72);
        assert_eq!(g.count_tag(EdgeTag::LeftRep), 96);
        assert_eq!(g.count_tag(EdgeTag::LeftZr), 64);
        // 8 cliques of size 4
        assert_eq!(g.count_tag(EdgeTag::Clique), 8 * 6);
        // m = 8 ≤ cM + 1 so Z_r is complete
        assert_eq!(g.count_tag(EdgeTag::ZrExpander), 28);
        let rep = audit(&g, &inst);
        assert!(rep.passed(), "{:?}", rep.failures);
    }

    #[test]
    fn fractional_beta_host() {
        let inst = Xor3Instance::new(
            3,
            vec![
                XorConstraint::new([0, 1, 2], false).unwrap(),
                XorConstraint::new([0, 1, 2], true).unwrap(),
            ],
        )
        .unwrap();
        let g = build_bs_instance(&inst, &GadgetParams::new(rat(2, 3), 3, 0)).unwrap();
        assert_eq!(g.num_vertices(), 22);
        assert!(audit(&g, &inst).passed());
        let zr = g.certificate("zr").unwrap();
        assert_eq!(zr.method, CertificateMethod::Complete);
        assert!(!zr.meets_target());
    }

    #[test]
    fn parameter_errors() {
        let (inst, _) = Xor3Instance::sample_planted(4, 8, 0).unwrap();
        assert!(build_bs_instance(&inst, &GadgetParams::new(rat_int(3), 2, 0)).is_err());
        assert!(build_bs_instance(&inst, &GadgetParams::new(rat_int(2), 0, 0)).is_err());
        let g = build_bs_instance(&inst, &GadgetParams::new(rat(2, 1), 2, 0)).unwrap();
        assert!(build_usc_instance(&g, 2, None).is_err());
        assert!(
            audit(&g, &Xor3Instance::sample_planted(4, 8, 1).unwrap().0).failures[0]
                .contains("provenance")
        );
    }

    #[test]
    fn deterministic_bytes() {
        let (_, a) = planted(6, 2, 2, 11);
        let (_, b) = planted(6, 2, 2, 11);
        assert_eq!(
            serde_json::to_string(&a.to_json()).unwrap(),
            serde_json::to_string(&b.to_json()).unwrap()
        );
        assert_eq!(GadgetGraph::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn usc_counts_and_audit() {
        let (inst, g) = planted(4, 2, 2, 5);
        let u = build_usc_instance(&g, 10, Some(2.0)).unwrap();
        assert_eq!(u.num_vertices(), 392);
        assert_eq!(u.count_tag(EdgeTag::DLink), 2 * 72);
        let rep = audit(&u, &inst);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(u.certificate("dl").unwrap().meets_target());
        assert!(build_usc_instance(&u, 10, None).is_err());
        let red = reduce_degree(&g).unwrap();
        let ur = build_usc_instance(&red.graph, 10, Some(2.0)).unwrap();
        assert_eq!(ur.host_part(), red.graph);
        assert_eq!(u.host_part(), g);
        assert!(ur.reduced);
        assert!(audit(&ur, &inst).passed());
    }

    #[test]
    fn reduction_below_threshold_is_identity() {
        let (inst, g) = planted(8, 2, 4, 1);
        let red = reduce_degree(&g).unwrap();
        // clique size 8 and every literal appears in at most a handful of constraints
        if left_rep_degrees(&g).iter().all(|&d| d <= 8) {
            assert!(red.removed.is_empty());
            assert_eq!(red.graph.edges, g.edges);
        }
        assert!(red.within_bound());
        assert!(audit(&red.graph, &inst).passed());
        assert!(reduce_degree(&red.graph).is_err());
    }

    #[test]
    fn reduction_strips_overloaded_representative() {
        // both literals of x0 are hit by 2k left vertices; every other representative by 2
        let k = 4u32;
        let cons: Vec<XorConstraint> = (1..=k)
            .map(|i| XorConstraint::new([0, 2 * i - 1, 2 * i], false).unwrap())
            .collect();
        let n = 2 * k as usize + 1;
        let m = cons.len();
        let inst = Xor3Instance::new(n, cons).unwrap();
        let g =
            build_bs_instance(&inst, &GadgetParams::new(rat(m as i64, n as i64), n, 0)).unwrap();
        let lay = g.layout();
        assert_eq!(lay.clique, m);
        let deg = left_rep_degrees(&g);
        let hot = [lay.rep(0, false), lay.rep(0, true)];
        assert!(hot.iter().all(|&h| deg[h as usize] == 2 * k as usize));
        assert_eq!(deg.iter().filter(|&&d| d == 2).count(), 4 * k as usize);
        // Y counted directly from pairs of left-rep edges
        let lr: Vec<_> = g
            .edges
            .iter()
            .filter(|e| e.tag == EdgeTag::LeftRep)
            .collect();
        let mut y = 0u64;
        for a in 0..lr.len() {
            for b in a + 1..lr.len() {
                y += (lr[a].v == lr[b].v) as u64;
            }
        }
        let red = reduce_degree(&g).unwrap();
        assert_eq!(red.shared_pairs, y);
        assert_eq!(red.removed.len(), 4 * k as usize);
        assert!(red.removed.iter().all(|&(_, v)| hot.contains(&v)));
        assert!(red.within_bound());
        assert!(left_rep_degrees(&red.graph)
            .iter()
            .all(|&d| d <= lay.clique + 1));
        assert!(audit(&red.graph, &inst).passed());
    }

    #[test]
    fn edge_list_has_role_table() {
        let (_, g) = planted(4, 2, 2, 0);
        let s = g.to_edge_list();
        assert!(s.starts_with("# vertices 72"));
        assert!(s.contains("# left 0..31"));
        assert!(s.contains("# zr 64..71"));
        assert_eq!(
            s.lines().filter(|l| !l.starts_with('#')).count(),
            g.num_edges()
        );
    }
}
