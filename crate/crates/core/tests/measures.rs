mod common;

use common::{all_paths, channel_factor, input_factor, oracle_joint, product_formula};
use dirinfo_core::measures::*;
use dirinfo_core::random::{random_backward, random_forward, random_pmf, random_spec};
use dirinfo_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn feedback_input(spec: &AlphabetSpec) -> BackwardKernel {
    BackwardKernel::from_fn(spec, |i, xs, ys| match i {
        0 => vec![0.35, 0.65],
        _ if ys[0] == 1 && xs[0] == 0 => vec![0.9, 0.1],
        _ if ys[0] == 1 => vec![0.2, 0.8],
        _ => vec![0.55, 0.45],
    })
    .unwrap()
}

fn bsc(spec: &AlphabetSpec, eps: f64) -> ForwardKernel {
    ForwardKernel::memoryless(spec, |_, x| bsc_row(x, eps)).unwrap()
}

#[test]
fn joint_matches_product_formula_with_feedback() {
    let spec = AlphabetSpec::uniform(1, 2, 2).unwrap();
    let (p, q) = (feedback_input(&spec), bsc(&spec, 0.1));
    let j = build_joint(&p, &q).unwrap();
    let oracle = oracle_joint(&p, &q);
    assert_eq!(oracle.len(), 16);
    for ((xs, ys), w) in &oracle {
        let got = j.weight(encode_path(spec.x_sizes(), xs), encode_path(spec.y_sizes(), ys));
        assert!((got - w).abs() < 1e-15, "{xs:?} {ys:?}");
    }
    assert!((j.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn joint_matches_product_formula_on_random_alphabets() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..40 {
        let spec = random_spec(&mut rng, 2, 3);
        let p = random_backward(&mut rng, &spec, 0.2);
        let q = random_forward(&mut rng, &spec, 0.2);
        let j = build_joint(&p, &q).unwrap();
        for (xs, ys) in all_paths(&spec) {
            let got = j.weight(encode_path(spec.x_sizes(), &xs), encode_path(spec.y_sizes(), &ys));
            assert!((got - product_formula(&p, &q, &xs, &ys)).abs() < 1e-15);
        }
    }
}

#[test]
fn marginals_match_summation() {
    let spec = AlphabetSpec::uniform(1, 2, 2).unwrap();
    let (p, q) = (feedback_input(&spec), bsc(&spec, 0.1));
    let j = build_joint(&p, &q).unwrap();
    let (mu, nu) = (marginal_x(&j), marginal_y(&j));
    let mut mu_ref = [0.0; 4];
    let mut nu_ref = [0.0; 4];
    for ((xs, ys), w) in oracle_joint(&p, &q) {
        mu_ref[encode_path(spec.x_sizes(), &xs)] += w;
        nu_ref[encode_path(spec.y_sizes(), &ys)] += w;
    }
    for k in 0..4 {
        assert!((mu[k] - mu_ref[k]).abs() < 1e-15);
        assert!((nu[k] - nu_ref[k]).abs() < 1e-15);
    }
}

#[test]
fn trivial_joints() {
    let spec = AlphabetSpec::uniform(0, 2, 2).unwrap();
    let j = build_joint(&BackwardKernel::uniform(&spec), &bsc(&spec, 0.0)).unwrap();
    assert_eq!(j.weights(), &[0.5, 0.0, 0.0, 0.5]);
    assert_eq!(marginal_x(&j).as_slice(), &[0.5, 0.5]);
    assert_eq!(marginal_y(&j).as_slice(), &[0.5, 0.5]);

    let point = BackwardKernel::new(spec.clone(), vec![vec![1.0, 0.0]]).unwrap();
    let j = build_joint(&point, &bsc(&spec, 0.0)).unwrap();
    assert_eq!(j.weights(), &[1.0, 0.0, 0.0, 0.0]);
    assert_eq!(marginal_x(&j).as_slice(), &[1.0, 0.0]);

    let blind = ForwardKernel::memoryless(&spec, |_, _| vec![0.3, 0.7]).unwrap();
    let j = build_joint(&BackwardKernel::uniform(&spec), &blind).unwrap();
    assert_eq!(marginal_y(&j).as_slice(), &[0.3, 0.7]);
}

#[test]
fn pi_products_match_term_by_term() {
    let spec = AlphabetSpec::uniform(1, 2, 2).unwrap();
    let p = feedback_input(&spec);
    let q = ForwardKernel::from_fn(&spec, |i, xs, ys| {
        let e = if i == 1 && ys[0] == xs[0] { 0.05 } else { 0.3 };
        bsc_row(xs[i], e)
    })
    .unwrap();
    let nu = Pmf::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let mu = Pmf::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    let fwd = product_pi_forward(&p, &nu).unwrap();
    let bwd = product_pi_backward(&mu, &q).unwrap();
    for (xs, ys) in all_paths(&spec) {
        let (xp, yp) = (encode_path(spec.x_sizes(), &xs), encode_path(spec.y_sizes(), &ys));
        assert!((fwd.weight(xp, yp) - nu[yp] * input_factor(&p, &xs, &ys)).abs() < 1e-15);
        assert!((bwd.weight(xp, yp) - mu[xp] * channel_factor(&q, &xs, &ys)).abs() < 1e-15);
    }
    // the forward product keeps nu as its output marginal
    let back = marginal_y(&fwd);
    for k in 0..4 {
        assert!((back[k] - nu[k]).abs() < 1e-15);
    }
}

#[test]
fn pi_forward_without_feedback_is_independent() {
    let spec = AlphabetSpec::uniform(1, 2, 3).unwrap();
    let p = BackwardKernel::without_feedback(&spec, |i, xs| {
        if i == 0 || xs[0] == 0 {
            vec![0.25, 0.75]
        } else {
            vec![0.6, 0.4]
        }
    })
    .unwrap();
    let nu = Pmf::uniform(9).unwrap();
    let pi = product_pi_forward(&p, &nu).unwrap();
    let mu = marginal_x(&build_joint(&p, &ForwardKernel::uniform(&spec)).unwrap());
    let independent = independent_product(&spec, &mu, &nu).unwrap();
    assert!(pi.total_variation(&independent).unwrap() < 1e-15);
}

#[test]
fn pi_forward_keeps_backward_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let spec = random_spec(&mut rng, 2, 3);
        let p = random_backward(&mut rng, &spec, 0.0);
        let q = random_forward(&mut rng, &spec, 0.0);
        let j = build_joint(&p, &q).unwrap();
        let pi = product_pi_forward(&p, &marginal_y(&j)).unwrap();
        let (a, b) = (extract_backward_family(&j), extract_backward_family(&pi));
        for (ta, tb) in a.steps().iter().zip(b.steps()) {
            assert!(ta.iter().zip(tb).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }
}

#[test]
fn extraction_from_product_ignores_inputs() {
    let spec = AlphabetSpec::uniform(1, 2, 2).unwrap();
    let mu = Pmf::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let nu = Pmf::new(vec![0.4, 0.1, 0.3, 0.2]).unwrap();
    let q = extract_forward_family(&independent_product(&spec, &mu, &nu).unwrap());
    assert!(q.ignores_input(1e-15));
    assert!((q.prob(0, &[1], &[], 0) - 0.5).abs() < 1e-15);
    assert!((q.prob(1, &[0, 1], &[1], 1) - 0.2 / 0.5).abs() < 1e-15);
}

#[test]
fn extraction_from_identity_joint() {
    let spec = AlphabetSpec::uniform(0, 2, 2).unwrap();
    let j = JointMeasure::new(spec.clone(), vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    let q = extract_forward_family(&j);
    assert_eq!(q.step(0), &[1.0, 0.0, 0.0, 1.0]);
    let point = JointMeasure::new(spec, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    // input 1 never occurs, so its row is uniform
    assert_eq!(extract_forward_family(&point).step(0), &[1.0, 0.0, 0.5, 0.5]);
}

#[test]
fn kl_anchors() {
    let a = Pmf::new(vec![1.0, 0.0]).unwrap();
    let b = Pmf::uniform(2).unwrap();
    assert!((kl_divergence(&a, &b).unwrap().nats() - std::f64::consts::LN_2).abs() < 1e-15);
    assert_eq!(kl_divergence(&b, &a).unwrap(), InfoValue::INFINITY);
    assert_eq!(kl_divergence(&b, &b).unwrap(), InfoValue::ZERO);
    let c = Pmf::uniform(3).unwrap();
    assert!(matches!(kl_divergence(&b, &c), Err(Error::SpecMismatch(_))));
}

#[test]
fn path_conditionals_match_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let spec = AlphabetSpec::uniform(1, 2, 3).unwrap();
    let q = random_forward(&mut rng, &spec, 0.2);
    let p = random_backward(&mut rng, &spec, 0.2);
    let cq = condition_forward(&q);
    let cp = condition_backward(&p);
    for (xs, ys) in all_paths(&spec) {
        let (xp, yp) = (encode_path(spec.x_sizes(), &xs), encode_path(spec.y_sizes(), &ys));
        assert!((cq.row(xp)[yp] - channel_factor(&q, &xs, &ys)).abs() < 1e-15);
        let yprev = encode_path(&spec.y_sizes()[..1], &ys[..1]);
        assert!((cp.row(yprev)[xp] - input_factor(&p, &xs, &ys)).abs() < 1e-15);
    }
}

#[test]
fn deterministic_channel_conditions_to_point_masses() {
    let spec = AlphabetSpec::uniform(1, 2, 2).unwrap();
    let q = ForwardKernel::from_fn(&spec, |i, xs, _| bsc_row(xs[i], 0.0)).unwrap();
    let c = condition_forward(&q);
    for x in 0..4 {
        let row = c.row(x);
        assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
        assert_eq!(row[x], 1.0);
    }
}

#[test]
fn mixing_endpoints_and_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = AlphabetSpec::uniform(1, 2, 2).unwrap();
    let a = condition_forward(&random_forward(&mut rng, &spec, 0.0));
    let b = condition_forward(&random_forward(&mut rng, &spec, 0.0));
    assert_eq!(mix_conditioned(&a, &b, 0.0).unwrap(), b);
    assert_eq!(mix_conditioned(&a, &b, 1.0).unwrap(), a);
    assert!(mix_conditioned(&a, &a, 0.3).unwrap().max_total_variation(&a).unwrap() < 1e-15);
    let half = mix_conditioned(&a, &b, 0.5).unwrap();
    let back = condition_forward(&refactor_to_forward_kernel(&half).unwrap());
    assert!(back.max_total_variation(&half).unwrap() < 1e-12);
    assert!(matches!(mix_conditioned(&a, &b, 1.5), Err(Error::Domain(_))));

    let pa = condition_backward(&random_backward(&mut rng, &spec, 0.0));
    let pb = condition_backward(&random_backward(&mut rng, &spec, 0.0));
    let mixed = mix_conditioned(&pa, &pb, 0.5).unwrap();
    let back = condition_backward(&refactor_to_backward_kernel(&mixed).unwrap());
    assert!(back.max_total_variation(&mixed).unwrap() < 1e-12);
    assert!(matches!(mix_conditioned(&a, &pa, 0.5), Err(Error::SpecMismatch(_))));
}

#[test]
fn spec_mismatch_is_rejected() {
    let a = AlphabetSpec::uniform(0, 2, 2).unwrap();
    let b = AlphabetSpec::uniform(0, 2, 3).unwrap();
    let err = build_joint(&BackwardKernel::uniform(&a), &ForwardKernel::uniform(&b)).unwrap_err();
    assert!(matches!(err, Error::SpecMismatch(_)));
}

fn seeded_spec(seed: u64) -> (ChaCha8Rng, AlphabetSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = random_spec(&mut rng, 2, 3);
    (rng, spec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gibbs_inequality(seed in any::<u64>(), k in 1usize..8, sparsity in 0.0f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Pmf::new(random_pmf(&mut rng, k, sparsity)).unwrap();
        let b = Pmf::new(random_pmf(&mut rng, k, sparsity)).unwrap();
        let d = kl_divergence(&a, &b).unwrap();
        prop_assert!(d.nats() >= 0.0);
        prop_assert_eq!(kl_divergence(&a, &a).unwrap(), InfoValue::ZERO);
        if a.total_variation(&b).unwrap() > 1e-6 {
            prop_assert!(d.nats() > 0.0);
        }
    }

    #[test]
    fn marginals_are_consistent(seed in any::<u64>()) {
        let (mut rng, spec) = seeded_spec(seed);
        let p = random_backward(&mut rng, &spec, 0.3);
        let q = random_forward(&mut rng, &spec, 0.3);
        let j = build_joint(&p, &q).unwrap();
        let mu = marginal_x(&j);
        let nu = marginal_y(&j);
        prop_assert!((mu.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((nu.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut mu_ref = vec![0.0; spec.x_paths()];
        for cell in 0..spec.cells() {
            mu_ref[spec.x_path(cell)] += j.weights()[cell];
        }
        for (a, b) in mu.as_slice().iter().zip(&mu_ref) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn extraction_round_trip(seed in any::<u64>()) {
        let (mut rng, spec) = seeded_spec(seed);
        let weights = random_pmf(&mut rng, spec.cells(), 0.0);
        let j = JointMeasure::new(spec, weights).unwrap();
        let back = build_joint(&extract_backward_family(&j), &extract_forward_family(&j)).unwrap();
        prop_assert!(back.weights().iter().zip(j.weights()).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn mixtures_stay_valid(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let (mut rng, spec) = seeded_spec(seed);
        let a = condition_forward(&random_forward(&mut rng, &spec, 0.3));
        let b = condition_forward(&random_forward(&mut rng, &spec, 0.3));
        let m = mix_conditioned(&a, &b, lambda).unwrap();
        for h in 0..m.rows() {
            let row = m.row(h);
            prop_assert!(row.iter().all(|&v| v >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let q = refactor_to_forward_kernel(&m).unwrap();
        prop_assert!(ForwardKernel::new(spec, q.into_steps()).is_ok());
    }
}
