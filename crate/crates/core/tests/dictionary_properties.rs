//! Cross-module dictionary properties: the representation-cost bound implies
//! the correlation property pointwise, the peeled-set dictionary passes
//! sampled verification at its certified correlation level, and the
//! brute-force dictionary prices sparse vectors at sqrt(t).


use sparsereg::dict::{
    brute_force_dictionary, build_small_eig_l1rep, representation_cost, verify_dictionary,
};
use sparsereg::linalg::eig;
use sparsereg::rng::rng_for;
use sparsereg::solvers::SolverConfig;
use sparsereg::synth::{gen_planted_dependencies, PlantedDep};
use sparsereg::testutil::{random_psd_with_condition, random_sparse};
use sparsereg::Vector;

fn planted(n: usize, seed: u64) -> sparsereg::synth::PlantedInstance {
    gen_planted_dependencies(
        n,
        &[
            PlantedDep {
                support: vec![0, 1],
                coefficients: vec![1.0, 1.0],
                residual_var: 1e-5,
            },
            PlantedDep {
                support: vec![2, 3, 4],
                coefficients: vec![2.0, -1.0, 1.0],
                residual_var: 1e-5,
            },
        ],
        1.0,
        Vector::zeros(n),
        seed,
    )
    .unwrap()
}

#[test]
fn l1rep_cost_bound_implies_correlation_pointwise() {
    // whenever cost <= B ||v||_Sigma holds for a sampled v, the maximum
    // normalized correlation with the dictionary is at least (1/B)(1 - 1e-6)
    let inst = planted(12, 3);
    let (d, t) = (2usize, 3usize);
    let dict = build_small_eig_l1rep(&inst.sigma, d, t, 1_000_000).unwrap();
    let e = eig(&inst.sigma).unwrap();
    let b_factor = 7.0 * (t as f64).sqrt() * (e.eigenvalues[11] / e.eigenvalues[d]).sqrt();
    let cfg = SolverConfig::default().with_max_iter(20_000);
    let mut rng = rng_for(9, 0);
    let mut checked = 0;
    for _ in 0..100 {
        let v = random_sparse(12, t, &mut rng);
        let nv = inst.sigma.norm(&v).unwrap();
        if nv <= 1e-8 {
            continue;
        }
        let (cost, _) = representation_cost(&dict, &v, None, &cfg).unwrap();
        let b = cost / nv;
        assert!(b <= b_factor * (1.0 + 1e-6));
        let mut max_corr = 0.0f64;
        for (atom, &na) in dict.atoms().iter().zip(dict.sigma_norms()) {
            if na <= 1e-12 {
                continue;
            }
            let c = inst.sigma.inner(&v, atom).unwrap().abs() / (nv * na);
            max_corr = max_corr.max(c);
        }
        assert!(
            max_corr >= (1.0 / b) * (1.0 - 1e-6),
            "correlation {max_corr} below 1/B = {}",
            1.0 / b
        );
        checked += 1;
    }
    assert!(checked > 50);
}

#[test]
fn small_eig_dictionary_passes_at_certified_alpha() {
    // alpha = (1 / (7 sqrt(t))) sqrt(lambda_{d+1} / lambda_n)
    let inst = planted(12, 5);
    let (d, t) = (2usize, 3usize);
    let dict = build_small_eig_l1rep(&inst.sigma, d, t, 1_000_000).unwrap();
    let e = eig(&inst.sigma).unwrap();
    let alpha = (1.0 / (7.0 * (t as f64).sqrt())) * (e.eigenvalues[d] / e.eigenvalues[11]).sqrt();
    let rep = verify_dictionary(&dict, &inst.sigma, t, alpha, 10_000, 17).unwrap();
    assert!(
        rep.pass,
        "min correlation {} below certified alpha {alpha}",
        rep.min_correlation
    );
}

#[test]
fn brute_force_prices_sparse_vectors_at_sqrt_t() {
    let sigma = random_psd_with_condition(7, 50.0, 11);
    let t = 3;
    let dict = brute_force_dictionary(&sigma, t, 10_000).unwrap();
    let cfg = SolverConfig::default().with_max_iter(20_000);
    let mut rng = rng_for(12, 0);
    for _ in 0..50 {
        let v = random_sparse(7, t, &mut rng);
        let nv = sigma.norm(&v).unwrap();
        if nv <= 1e-10 {
            continue;
        }
        let (cost, _) = representation_cost(&dict, &v, None, &cfg).unwrap();
        assert!(
            cost <= (t as f64).sqrt() * nv * (1.0 + 1e-6),
            "cost {cost} above sqrt(t) bound {}",
            (t as f64).sqrt() * nv
        );
    }
}

#[test]
fn standard_basis_fails_where_peeled_dictionary_passes() {
    // a planted two-sparse dependency drives the standard basis below the
    // certified level while the peeled dictionary stays above it
    let inst = gen_planted_dependencies(
        8,
        &[PlantedDep {
            support: vec![0, 1],
            coefficients: vec![1.0, -1.0],
            residual_var: 1e-6,
        }],
        1.0,
        Vector::zeros(8),
        0,
    )
    .unwrap();
    let t = 2;
    let e = eig(&inst.sigma).unwrap();
    let alpha = (1.0 / (7.0 * (t as f64).sqrt())) * (e.eigenvalues[1] / e.eigenvalues[7]).sqrt();
    let std_dict = sparsereg::dict::standard_basis_dictionary(&inst.sigma).unwrap();
    // the dependency direction (e1 - e2)/sqrt(2) has tiny Sigma-norm but unit
    // correlation structure: its correlation with every e_i is tiny
    let rep = verify_dictionary(&std_dict, &inst.sigma, t, 0.5, 2_000, 3).unwrap();
    assert!(!rep.pass, "standard basis should fail at alpha = 0.5 here");
    let peeled = build_small_eig_l1rep(&inst.sigma, 1, t, 1_000_000).unwrap();
    let rep2 = verify_dictionary(&peeled, &inst.sigma, t, alpha, 2_000, 3).unwrap();
    assert!(rep2.pass);
}
