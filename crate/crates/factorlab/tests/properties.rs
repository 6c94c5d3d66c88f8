//! Property tests over randomly drawn semiprimes, multipliers and marks.

use proptest::prelude::*;

use factorlab::marking::{self, SuccessMode};
use factorlab::numtheory::{factor_by_trial_division, gcd, FactorPair};
use factorlab::orbitgraph::{self, BuildOptions, VertexClass};
use factorlab::walk::{self, GroundedLaplacian, WalkState};

const PRIMES: &[u64] = &[
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67,
];

fn trivial_ok() -> BuildOptions {
    BuildOptions {
        validate_semiprime: true,
        allow_trivial_alpha: true,
    }
}

/// A semiprime below 5000 and a uniformly chosen totative of it.
fn semiprime_and_alpha() -> impl Strategy<Value = (FactorPair, u64)> {
    (0..PRIMES.len(), 0..PRIMES.len(), any::<u64>())
        .prop_filter_map("distinct primes with small product", |(i, j, raw)| {
            if i == j {
                return None;
            }
            let (p, q) = (PRIMES[i].min(PRIMES[j]), PRIMES[i].max(PRIMES[j]));
            let n = p * q;
            if n >= 5000 {
                return None;
            }
            let factors = FactorPair::new(p, q).ok()?;
            // walk upward from a random start until coprime
            let mut alpha = raw % (n - 1) + 1;
            while gcd(alpha, n) != 1 {
                alpha = alpha % (n - 1) + 1;
            }
            Some((factors, alpha))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn formula_total_matches_traversal((factors, alpha) in semiprime_and_alpha()) {
        let g = orbitgraph::build_with(factors.n(), &[alpha], trivial_ok()).unwrap();
        let d = orbitgraph::decompose(&g, &factors);
        let formula = orbitgraph::cycle_count_formula(&factors, alpha).unwrap();
        prop_assert_eq!(formula, d.counts());
    }

    #[test]
    fn edges_are_symmetric_and_degrees_bounded((factors, alpha) in semiprime_and_alpha()) {
        let g = orbitgraph::build_with(factors.n(), &[alpha], trivial_ok()).unwrap();
        for v in 1..g.n() {
            prop_assert!(g.degree(v) <= 2 * g.alphas().len());
            for &u in g.neighbors(v) {
                prop_assert!(g.neighbors(u).contains(&v), "edge {{{u},{v}}} not symmetric");
            }
        }
    }

    #[test]
    fn components_are_monochromatic((factors, alpha) in semiprime_and_alpha()) {
        let g = orbitgraph::build_with(factors.n(), &[alpha], trivial_ok()).unwrap();
        let d = orbitgraph::decompose(&g, &factors);
        let mut total = 0usize;
        for c in d.components() {
            total += c.vertices.len();
            let class = VertexClass::of(c.vertices[0], &factors);
            for &v in &c.vertices {
                prop_assert_eq!(VertexClass::of(v, &factors), class);
            }
        }
        // components partition 1..N-1
        prop_assert_eq!(total as u64, g.vertex_count());
    }

    #[test]
    fn laplacian_rows_sum_to_zero((factors, alpha) in semiprime_and_alpha()) {
        prop_assume!(factors.n() <= 600); // keep the dense matrix small
        let g = orbitgraph::build_with(factors.n(), &[alpha], trivial_ok()).unwrap();
        let l = g.laplacian();
        for r in 0..l.nrows() {
            prop_assert!(l.row(r).sum().abs() < 1e-12);
            for c in 0..r {
                prop_assert_eq!(l[[r, c]], l[[c, r]]);
            }
        }
    }

    #[test]
    fn sampled_marks_are_sorted_distinct_in_range(
        seed in any::<u64>(),
        n_vertices in 3u64..200,
        k_raw in any::<u64>(),
    ) {
        let k = k_raw % (n_vertices - 1) + 1;
        let mut rng = marking::substream_rng(seed, 0);
        let m = marking::sample_marks(n_vertices, k, &mut rng).unwrap();
        prop_assert_eq!(m.len() as u64, k);
        for w in m.vertices().windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        prop_assert!(m.vertices()[0] >= 1);
        prop_assert!(*m.vertices().last().unwrap() <= n_vertices);
    }

    #[test]
    fn walk_step_preserves_distribution_invariants(
        (factors, alpha) in semiprime_and_alpha(),
        seed in any::<u64>(),
        dt_frac in 0.05f64..0.95,
        steps in 1usize..30,
    ) {
        prop_assume!(factors.n() <= 600);
        let g = orbitgraph::build_with(factors.n(), &[alpha], trivial_ok()).unwrap();
        let n_vertices = g.vertex_count();
        let mut rng = marking::substream_rng(seed, 0);
        let k = seed % (n_vertices - 1) + 1;
        let marks = marking::sample_marks(n_vertices, k, &mut rng).unwrap();
        let lp = GroundedLaplacian::build(&g, marks.vertices()).unwrap();

        let bound = if lp.lambda_max_bound() > 0.0 { 1.0 / lp.lambda_max_bound() } else { 1.0 };
        let dt = dt_frac * bound;
        let e = walk::walking_matrix(&lp, dt).unwrap();
        let mut state = WalkState::uniform(lp.dim());
        for _ in 0..steps {
            let v = e.dot(&state.distribution);
            let s: f64 = v.iter().sum();
            state = walk::step(&state, &e).unwrap();
            let l1: f64 = state.distribution.iter().sum();
            prop_assert!((l1 - 1.0).abs() < 1e-12, "l1 drifted to {l1}");
            prop_assert!(state.distribution.iter().all(|&x| x >= 0.0));
            // (1 + W/S)·E·P = (E·P)/S elementwise
            for (a, b) in state.distribution.iter().zip(v.iter()) {
                prop_assert!((a - b / s).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn strict_success_implies_weak_success(
        seed in any::<u64>(),
        k_raw in 1u64..13,
    ) {
        // small instance so the spectral check stays cheap
        let g = orbitgraph::build(15, &[2]).unwrap();
        let factors = factor_by_trial_division(15).unwrap();
        let d = orbitgraph::decompose(&g, &factors);
        let mut rng = marking::substream_rng(seed, 1);
        let marks = marking::sample_marks(14, k_raw, &mut rng).unwrap();
        if marking::check_strict(&d, &marks) {
            let weak = marking::check_weak(&g, &factors, &marks, marking::default_weak_eps(15)).unwrap();
            prop_assert!(weak, "strict success must imply weak success: {:?}", marks.vertices());
        }
    }
}

/// Plain brute-force subset enumerator, written against the component
/// vertex lists rather than the library predicate; walks subsets in
/// descending lexicographic order to differ from the pruned path.
fn brute_force_strict_count(n: u64, alphas: &[u64], k: usize) -> u64 {
    let g = orbitgraph::build_with(n, alphas, trivial_ok()).unwrap();
    let factors = factor_by_trial_division(n).unwrap();
    let d = orbitgraph::decompose(&g, &factors);
    let comps: Vec<(VertexClass, Vec<u64>)> = d
        .components()
        .iter()
        .map(|c| (c.class, c.vertices.clone()))
        .collect();

    let satisfied = |subset: &[u64]| -> bool {
        let hit = |members: &[u64]| members.iter().any(|v| subset.contains(v));
        comps
            .iter()
            .all(|(class, members)| *class != VertexClass::Black || hit(members))
            && comps
                .iter()
                .any(|(class, members)| *class != VertexClass::Black && !hit(members))
    };

    let mut count = 0u64;
    let mut subset: Vec<u64> = Vec::with_capacity(k);
    // descending: choose the largest remaining vertex first
    fn rec(
        next: u64,
        remaining: usize,
        subset: &mut Vec<u64>,
        count: &mut u64,
        satisfied: &dyn Fn(&[u64]) -> bool,
    ) {
        if remaining == 0 {
            if satisfied(subset) {
                *count += 1;
            }
            return;
        }
        if (next as usize) < remaining {
            return;
        }
        let mut v = next;
        while v as usize >= remaining {
            subset.push(v);
            rec(v - 1, remaining - 1, subset, count, satisfied);
            subset.pop();
            if v == 1 {
                break;
            }
            v -= 1;
        }
    }
    rec(n - 1, k, &mut subset, &mut count, &satisfied);
    count
}

#[test]
fn pruned_enumerator_matches_brute_force_on_small_graphs() {
    for (n, alphas) in [(15u64, vec![2u64]), (15, vec![2, 7]), (21, vec![2]), (10, vec![3])] {
        let g = orbitgraph::build(n, &alphas).unwrap();
        let factors = factor_by_trial_division(n).unwrap();
        for k in 1..=(n - 2).min(6) {
            let (pruned, _) = marking::exact_success_count_with_budget(
                &g,
                &factors,
                k,
                SuccessMode::Strict,
                marking::DEFAULT_ENUM_BUDGET,
            )
            .unwrap();
            let brute = brute_force_strict_count(n, &alphas, k as usize);
            assert_eq!(
                pruned, brute,
                "N={n} alphas={alphas:?} k={k}: pruned {pruned} vs brute {brute}"
            );
        }
    }
}
