//! Randomized invariants. Case counts are tuned so the whole file stays
//! in the tens of seconds on one core.

use proptest::prelude::*;

use haarlab::dyadic::DyadicInterval;
use haarlab::exact::{rat, Rat};
use haarlab::grid::{square_function, Grid, DEFAULT_CELL_BUDGET};
use haarlab::riesz::{
    build_riesz_product, build_riesz_product_excluding, certificate, derive_params,
    tail_profile, verify_main_identity, RieszParams,
};
use haarlab::search::{exhaustive_min, local_search, FlipState, Strategy as SearchStrategy};
use haarlab::signs::{
    build_block_sum, build_hyperbolic_sum, build_hyperbolic_sum_direct, build_rfunction,
    BlockPartition, SignAssignment,
};

const BUDGET: u64 = DEFAULT_CELL_BUDGET;

fn params(n: u32, d: usize, q: u32, rho: Rat) -> RieszParams {
    derive_params(n, d, 1.0, 1.0 / (4.0 * d as f64), Some(q), Some(rho)).unwrap()
}

fn rho_choices() -> impl Strategy<Value = Rat> {
    prop_oneof![
        Just(rat(1, 8)),
        Just(rat(1, 16)),
        Just(rat(1, 3)),
        Just(rat(3, 8)),
        Just(rat(0, 1)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rfunctions_are_unimodular(d in 1usize..=3, n in 0u32..=4, seed: u64) {
        let a = SignAssignment::random(seed, n, d).unwrap();
        for r in a.shapes() {
            let f = build_rfunction(r, &a, BUDGET).unwrap();
            prop_assert!(f.values().iter().all(|v| v.abs() == 1));
        }
    }

    #[test]
    fn distinct_shapes_are_orthogonal(d in 2usize..=3, n in 1u32..=4, seed: u64, i: usize, j: usize) {
        let a = SignAssignment::random(seed, n, d).unwrap();
        let k = a.shapes().len();
        let (i, j) = (i % k, j % k);
        let fi = build_rfunction(&a.shapes()[i], &a, BUDGET).unwrap();
        let fj = build_rfunction(&a.shapes()[j], &a, BUDGET).unwrap();
        let want = if i == j { rat(1, 1) } else { rat(0, 1) };
        prop_assert_eq!(fi.inner(&fj).unwrap(), want);
    }

    #[test]
    fn block_sums_partition_h(d in 2usize..=3, n in 1u32..=4, q_raw in 1u32..=5, seed: u64) {
        let q = q_raw.min(n + 1);
        let a = SignAssignment::random(seed, n, d).unwrap();
        let part = BlockPartition::new(n, q).unwrap();
        let h = build_hyperbolic_sum(&a, BUDGET).unwrap();
        let mut acc = Grid::zeros(d, h.m(), BUDGET).unwrap();
        for t in 1..=q as usize {
            acc.add_assign_grid(&build_block_sum(t, &part, &a, BUDGET).unwrap()).unwrap();
        }
        prop_assert_eq!(acc.values(), h.values());
    }

    #[test]
    fn fast_synthesis_matches_direct(d in 1usize..=3, n in 1u32..=4, seed: u64) {
        let a = SignAssignment::random(seed, n, d).unwrap();
        let fast = build_hyperbolic_sum(&a, BUDGET).unwrap();
        let direct = build_hyperbolic_sum_direct(&a, BUDGET).unwrap();
        prop_assert_eq!(fast.values(), direct.values());
    }

    #[test]
    fn refinement_preserves_norms(d in 1usize..=2, n in 1u32..=3, extra in 1u32..=2, seed: u64) {
        let a = SignAssignment::random(seed, n, d).unwrap();
        let h = build_hyperbolic_sum(&a, BUDGET).unwrap();
        let fine = h.refine(h.m() + extra).unwrap();
        prop_assert_eq!(fine.linf(), h.linf());
        prop_assert_eq!(fine.moment_abs(1).unwrap(), h.moment_abs(1).unwrap());
        prop_assert_eq!(fine.moment_abs(2).unwrap(), h.moment_abs(2).unwrap());
    }

    #[test]
    fn moment_chain_inequalities(d in 1usize..=3, n in 1u32..=4, seed: u64) {
        let a = SignAssignment::random(seed, n, d).unwrap();
        let h = build_hyperbolic_sum(&a, BUDGET).unwrap();
        let m2 = h.moment_abs(2).unwrap();
        let m4 = h.moment_abs(4).unwrap();
        let linf = rat(h.linf() as i128, 1);
        // Cauchy-Schwarz and the trivial domination, all exact.
        prop_assert!(m2.clone() * m2.clone() <= m4.clone());
        prop_assert!(m4 <= linf.clone() * linf * m2);
    }

    #[test]
    fn sign_file_json_round_trips(d in 1usize..=3, n in 0u32..=5, seed: u64) {
        let a = SignAssignment::random(seed, n, d).unwrap();
        let text = a.to_json();
        let b = SignAssignment::from_json(&text).unwrap();
        prop_assert_eq!(b.to_json(), text);
    }

    #[test]
    fn square_function_l2_matches_coefficients(
        levels in prop::collection::vec((0u32..=5, any::<u64>(), -4.0f64..4.0), 1..12)
    ) {
        let mut coeffs = std::collections::BTreeMap::new();
        for (k, pos_raw, c) in levels {
            let pos = pos_raw % (1u64 << k);
            coeffs.insert((k, pos), c);
        }
        let m = coeffs.keys().map(|(k, _)| k + 1).max().unwrap();
        let list: Vec<(DyadicInterval, f64)> = coeffs
            .iter()
            .map(|((k, pos), c)| (DyadicInterval::new(*k, *pos).unwrap(), *c))
            .collect();
        let s = square_function(&list, m).unwrap();
        let got: f64 = s.moment_abs(2);
        let want: f64 = coeffs
            .iter()
            .map(|((k, _), c)| c * c / (1u64 << k) as f64)
            .sum();
        prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flip_state_stays_consistent(
        d in 2usize..=3,
        n in 1u32..=3,
        seed: u64,
        flips in prop::collection::vec(any::<u64>(), 1..40)
    ) {
        let a = SignAssignment::random(seed, n, d).unwrap();
        let bits = a.flat_len();
        let mut st = FlipState::new(a, BUDGET).unwrap();
        for f in flips {
            st.flip(f % bits);
        }
        prop_assert!(st.consistent(BUDGET).unwrap());
    }

    #[test]
    fn riesz_product_mean_and_factorization(
        d in 2usize..=3,
        n in 1u32..=3,
        q_raw in 1u32..=2,
        rho in rho_choices(),
        seed: u64,
    ) {
        let q = q_raw.min(n + 1);
        let a = SignAssignment::random(seed, n, d).unwrap();
        let p = params(n, d, q, rho);
        let psi = build_riesz_product::<Rat>(&p, &a, BUDGET).unwrap();
        prop_assert_eq!(psi.mean(), rat(1, 1));
        // Psi = (1 + rho F_j) Psi_{!=j} cellwise.
        let j = 1 + (seed as usize) % q as usize;
        let mut excl = build_riesz_product_excluding::<Rat>(j, &p, &a, BUDGET).unwrap();
        let f_j = build_block_sum(j, &p.partition, &a, BUDGET).unwrap();
        excl.mul_one_plus_scaled(&f_j, &rho).unwrap();
        prop_assert_eq!(excl.values(), psi.values());
    }

    #[test]
    fn main_identity_residual_vanishes(
        d in 2usize..=3,
        n in 1u32..=3,
        q_raw in 1u32..=2,
        rho in rho_choices(),
        seed: u64,
    ) {
        let q = q_raw.min(n + 1);
        let a = SignAssignment::random(seed, n, d).unwrap();
        let p = params(n, d, q, rho);
        let j = 1 + (seed as usize) % q as usize;
        let rep = verify_main_identity::<Rat>(j, &p, &a, BUDGET).unwrap();
        prop_assert_eq!(rep.residual, rat(0, 1));
    }

    #[test]
    fn exact_certificate_is_sound(
        d in 2usize..=3,
        n in 1u32..=3,
        q_raw in 1u32..=2,
        rho in rho_choices(),
        seed: u64,
    ) {
        let q = q_raw.min(n + 1);
        let a = SignAssignment::random(seed, n, d).unwrap();
        let p = params(n, d, q, rho);
        let c = certificate::<Rat>(&p, &a, BUDGET).unwrap();
        prop_assert!(c.sound);
        prop_assert!(c.bound <= rat(c.linf_exact as i128, 1));
        prop_assert!(c.bound >= rat(0, 1));
    }

    #[test]
    fn tail_mass_is_monotone_and_proper(
        d in 2usize..=3,
        n in 1u32..=4,
        seed: u64,
    ) {
        let a = SignAssignment::random(seed, n, d).unwrap();
        let p = params(n, d, 1, rat(1, 8));
        let xs = [0.0, 0.5, 1.0, 1.5, 2.0, 4.0, 64.0];
        let rows = tail_profile(1, &p, &a, &xs, BUDGET).unwrap();
        for w in rows.windows(2) {
            prop_assert!(w[1].mass <= w[0].mass);
        }
        for r in &rows {
            prop_assert!(r.mass >= rat(0, 1) && r.mass <= rat(1, 1));
        }
        prop_assert_eq!(rows.last().unwrap().mass, rat(0, 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn exhaustive_is_a_lower_bound_for_local_search(
        d in 1usize..=2,
        n in 1u32..=2,
        seed: u64,
    ) {
        let ex = exhaustive_min(n, d, 16, BUDGET).unwrap();
        let loc = local_search(n, d, SearchStrategy::Hillclimb, seed, 200, 1, BUDGET).unwrap();
        prop_assert!(ex.best_value <= loc.best_value);
        let shapes = ex.best_signs.shapes().len() as i64;
        prop_assert!(ex.best_value * ex.best_value >= shapes);
    }
}
