mod common;

use common::*;
use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotorkit::free_routing::{boundary, legal_with_vector};
use rotorkit::grm::{build_cyclic_grm, CyclicGrm};
use rotorkit::oracle::{free_sequence_search, grm_sequence_search};
use rotorkit::reach::{brute_force_reach, is_recurrent_cyclic, kernel_basis_cyclic, legal_reach_cyclic, Reach, SearchBounds};
use rotorkit::rotor::{is_recurrent_standard, maximal_rotor_walk, Policy};
use rotorkit::{Config, IndexKind};

fn pinned(cases: u32, seed: u64) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn degrees(c: &CyclicGrm, r: &Config, s: &Config) -> (Vec<BigInt>, BigInt) {
    let g = c.gv();
    let per_vertex = (0..g.num_vertices()).map(|v| g.out_arcs(v).iter().map(|&a| r.get(a)).sum()).collect();
    (per_vertex, s.total())
}

proptest! {
    #![proptest_config(pinned(128, 1))]

    #[test]
    fn l_matrix_matches_direct_evaluation(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let m = random_grm(&mut rng, 5);
        let phi = random_face_vector(&mut rng, &m, 10).combine(&BigInt::from(-1), &random_face_vector(&mut rng, &m, 4)).unwrap();
        let (dr, ds) = m.apply_l(&phi).unwrap();
        let mut expect = dr.to_dense();
        expect.extend(ds.to_dense());
        prop_assert_eq!(m.l_matrix().mul_vec(&phi.to_dense()).unwrap(), expect);
    }

    #[test]
    fn linear_routing_preserves_degrees(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let c = random_cyclic(&mut rng, 5);
        let r = random_config(&mut rng, c.gv().arc_universe(), -2, 3);
        let s = random_config(&mut rng, c.gv().vertex_universe(), -2, 3);
        let phi = random_face_vector(&mut rng, &c, 12);
        let (dr, ds) = c.apply_l(&phi).unwrap();
        prop_assert_eq!(degrees(&c, &r, &s), degrees(&c, &r.add(&dr).unwrap(), &s.add(&ds).unwrap()));
    }

    #[test]
    fn free_legality_matches_sequence_search(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.gen_range(1..=5);
        let m = rng.gen_range(0..=8);
        let g = random_graph(&mut rng, n, m);
        let s = random_config(&mut rng, g.vertex_universe(), -1, 2);
        let mut r = Config::zero(g.arc_universe());
        if m > 0 {
            for _ in 0..rng.gen_range(0..=7) {
                r.add_coeff(rng.gen_range(0..m), BigInt::from(1)).unwrap();
            }
        }
        let t = s.add(&boundary(&g, &r).unwrap()).unwrap();
        let fast = legal_with_vector(&g, &s, &r, &t).unwrap();
        let slow = free_sequence_search(&g, &s, &r).unwrap().is_some();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn general_legality_matches_sequence_search(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let m = random_grm(&mut rng, 4);
        let r = random_config(&mut rng, m.gv().arc_universe(), -1, 2);
        let s = random_config(&mut rng, m.gv().vertex_universe(), -1, 2);
        let phi = random_face_vector(&mut rng, &m, 6);
        let (dr, ds) = m.apply_l(&phi).unwrap();
        let (r2, s2) = (r.add(&dr).unwrap(), s.add(&ds).unwrap());
        let fast = m.legal_with_vector_grm(&r, &s, &phi, &r2, &s2).unwrap();
        let slow = grm_sequence_search(&m, &r, &s, &phi).unwrap().is_some();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn cyclic_conditions_match_general_theorem(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let c = random_cyclic(&mut rng, 5);
        let r = random_config(&mut rng, c.gv().arc_universe(), -1, 2);
        let s = random_config(&mut rng, c.gv().vertex_universe(), -1, 2);
        let phi = random_face_vector(&mut rng, &c, 10);
        let (dr, ds) = c.apply_l(&phi).unwrap();
        let (r2, s2) = (r.add(&dr).unwrap(), s.add(&ds).unwrap());
        prop_assert_eq!(
            c.legal_with_vector_cyclic(&r, &s, &phi, &r2, &s2).unwrap(),
            c.legal_with_vector_grm(&r, &s, &phi, &r2, &s2).unwrap()
        );
    }

    #[test]
    fn rotor_corollary_matches_cyclic_conditions(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let g = random_stopping_graph(&mut rng, 5);
        let rg = random_orders(&mut rng, &g);
        let c = build_cyclic_grm(&rg);
        let rho = random_rotor_config(&mut rng, &g).to_config(&g);
        let k = rng.gen_range(0..=4);
        let s = random_particles(&mut rng, &g, k);
        let phi = random_face_vector(&mut rng, &c, 8);
        let (dr, ds) = c.apply_l(&phi).unwrap();
        let (rho2, s2) = (rho.add(&dr).unwrap(), s.add(&ds).unwrap());
        let is_rotor = rotorkit::rotor::RotorConfiguration::from_config(&g, &rho2).is_ok();
        prop_assume!(is_rotor && s2.is_nonnegative());
        prop_assert_eq!(
            c.legal_rotor_corollary(&rho, &s, &phi, &rho2, &s2).unwrap(),
            c.legal_with_vector_cyclic(&rho, &s, &phi, &rho2, &s2).unwrap()
        );
    }

    #[test]
    fn walks_are_legal_face_vectors(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let g = random_stopping_graph(&mut rng, 6);
        let rg = random_orders(&mut rng, &g);
        let c = build_cyclic_grm(&rg);
        let rho = random_rotor_config(&mut rng, &g);
        let k = rng.gen_range(0..=6);
        let s = random_particles(&mut rng, &g, k);
        let w = maximal_rotor_walk(&rg, &rho, &s, Policy::ReverseCanonical, 1_000_000).unwrap();
        let phi = c.faces_from_run(&w.run).unwrap();
        prop_assert!(c.legal_with_vector_cyclic(&rho.to_config(&g), &s, &phi, &w.rho.to_config(&g), &w.sigma).unwrap());
        let (found, kernel) = c.solve_routing_vector(&rho.to_config(&g), &s, &w.rho.to_config(&g), &w.sigma).unwrap().unwrap();
        prop_assert!(kernel.is_empty());
        prop_assert_eq!(found, phi);
        prop_assert!(kernel_basis_cyclic(&c).unwrap().is_empty());
    }

    #[test]
    fn cyclic_decision_matches_brute_force(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let c = random_cyclic(&mut rng, 4);
        let r = random_config(&mut rng, c.gv().arc_universe(), -1, 2);
        let s = random_config(&mut rng, c.gv().vertex_universe(), -1, 2);
        let steps = rng.gen_range(0..=8);
        let (mut r2, mut s2) = random_legal_walk(&mut rng, &c, &r, &s, steps);
        if rng.gen_bool(0.5) {
            let (dr, ds) = c.apply_l(&random_face_vector(&mut rng, &c, 2).neg()).unwrap();
            r2 = r2.add(&dr).unwrap();
            s2 = s2.add(&ds).unwrap();
        }
        let fast = legal_reach_cyclic(&c, &r, &s, &r2, &s2).unwrap();
        let slow = brute_force_reach(&c, &r, &s, &r2, &s2, SearchBounds::default()).unwrap();
        prop_assert_eq!(fast.is_reachable(), slow);
        if let Reach::Reachable(phi) = fast {
            prop_assert!(c.legal_with_vector_grm(&r, &s, &phi, &r2, &s2).unwrap());
        }
    }

    #[test]
    fn recurrence_depends_on_the_configuration_only(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let g = loop {
            let n = rng.gen_range(1..=4);
            let g = random_graph_with_sinks(&mut rng, n, 0);
            if g.is_strongly_connected() {
                break g;
            }
        };
        let rg = random_orders(&mut rng, &g);
        let c = build_cyclic_grm(&rg);
        let rho = random_rotor_config(&mut rng, &g);
        let k = rng.gen_range(0..=3);
        let s = random_particles(&mut rng, &g, k);
        let r = rho.to_config(&g);
        let verdict = is_recurrent_cyclic(&c, &r, &s).unwrap();
        prop_assert_eq!(verdict, is_recurrent_standard(&rg, &rho, &s).unwrap());
        // a full turn from a recurrent configuration comes back legally
        let turn = kernel_basis_cyclic(&c).unwrap().remove(0);
        let seq = grm_sequence_search(&c, &r, &s, &turn);
        prop_assume!(seq.is_ok());
        prop_assert_eq!(verdict, seq.unwrap().is_some());
    }
}

#[test]
fn face_universe_kind() {
    let c = build_cyclic_grm(&load("g1.rg").rotor().unwrap());
    assert_eq!(c.face_universe().kind(), IndexKind::Face);
    assert_eq!(c.gv().arc_universe().kind(), IndexKind::Arc);
}
