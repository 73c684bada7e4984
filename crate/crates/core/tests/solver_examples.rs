use hankel_prior::prior::{build_prior_lift, PriorLift};
use hankel_prior::rng::derive_seed;
use hankel_prior::signal::ComplexSignal;
use hankel_prior::solvers::{
    admm_recover, convex_recover, init_factors, recover_with_prior, AdmmConfig, ConvexConfig, InitBranch,
};
use hankel_prior::spectral::{estimate_2d, matrix_pencil};
use hankel_prior::{draw_samples, make_prior, mask, HankelShape, RandomModel, SampleSet, SamplingLaw, Variant};

struct Case {
    x: ComplexSignal<f64>,
    phi: ComplexSignal<f64>,
    omega: SampleSet,
    obs: ComplexSignal<f64>,
    shape: HankelShape,
}

fn case(dims: &[usize], rank: usize, m: usize, sigma: f64, seed: u64) -> Case {
    let x = RandomModel { dims: dims.to_vec(), rank, min_separation: None, amplitudes: Default::default() }
        .generate(derive_seed(seed, 0))
        .unwrap()
        .synthesize();
    let phi = make_prior(&x, sigma, derive_seed(seed, 1));
    let omega = draw_samples(dims, m, SamplingLaw::WithoutReplacement, derive_seed(seed, 2)).unwrap();
    let obs = mask(&x, &omega).unwrap();
    let shape = HankelShape::with_default_pencils(dims.to_vec(), Variant::Standard).unwrap();
    Case { x, phi, omega, obs, shape }
}

#[test]
fn prior_aided_convex_recovers_undersampled_signal() {
    let mut ok = 0;
    for t in 0..10u64 {
        let c = case(&[32], 3, 10, 0.5, derive_seed(1, t));
        let prior = build_prior_lift(&c.phi, &c.shape, 1.0, 3).unwrap();
        let res = convex_recover(&c.obs, &c.omega, &c.shape, &prior, None, &ConvexConfig::default()).unwrap();
        if res.z.relative_error(&c.x) < 1e-4 {
            ok += 1;
        }
    }
    assert!(ok >= 8, "prior-aided convex recovered {ok}/10");
}

#[test]
fn vanilla_convex_solves_full_sampling_trivially() {
    let c = case(&[12], 2, 12, 0.0, 3);
    let res = convex_recover(&c.obs, &c.omega, &c.shape, &PriorLift::zero(&c.shape), None, &ConvexConfig::default())
        .unwrap();
    assert!(res.z.relative_error(&c.x) < 1e-12);
}

#[test]
fn exact_prior_rescues_tiny_sample_budget() {
    // n=8, r=1, two samples: paired trials with and without the exact prior.
    let mut rescued = 0;
    for t in 0..50u64 {
        let c = case(&[8], 1, 2, 0.0, derive_seed(4, t));
        let cfg = ConvexConfig::default();
        let with = build_prior_lift(&c.x, &c.shape, 1.0, 1).unwrap();
        let a = convex_recover(&c.obs, &c.omega, &c.shape, &with, None, &cfg).unwrap();
        let b = convex_recover(&c.obs, &c.omega, &c.shape, &PriorLift::zero(&c.shape), None, &cfg).unwrap();
        if a.z.relative_error(&c.x) < 1e-4 && b.z.relative_error(&c.x) > 1e-4 {
            rescued += 1;
        }
    }
    assert!(rescued > 25, "prior succeeded where vanilla failed on {rescued}/50");
}

#[test]
fn admm_matches_convex_on_small_instance() {
    let mut compared = 0;
    for t in 0..10u64 {
        let c = case(&[8], 1, 5, 0.0, derive_seed(5, t));
        let mut cfg = AdmmConfig::new(1);
        cfg.max_iters = 5000;
        let a = recover_with_prior(&c.obs, &c.omega, &c.shape, Some(&c.x), &cfg).unwrap();
        let prior = build_prior_lift(&c.x, &c.shape, 1.0, 1).unwrap();
        let b = convex_recover(&c.obs, &c.omega, &c.shape, &prior, None, &ConvexConfig::default()).unwrap();
        assert!(a.converged && b.converged);
        let gap = a.z.distance(&b.z) / b.z.norm();
        assert!(gap < 1e-2, "trial {t}: gap {gap}");
        compared += 1;
    }
    assert_eq!(compared, 10);
}

#[test]
fn untrusted_prior_reduces_to_vanilla_factorisation() {
    let c = case(&[32], 3, 16, 0.0, 6);
    let wild = make_prior(&c.x, 10.0, 99);
    let mut cfg = AdmmConfig::new(3);
    cfg.eps_init = Some(1e-3);
    cfg.seed = 7;
    let init = init_factors(&c.obs, &c.omega, &c.shape, Some(&wild), &cfg).unwrap();
    assert_eq!(init.branch, InitBranch::Lmafit);
    assert!(init.prior.is_zero());
    let guarded = recover_with_prior(&c.obs, &c.omega, &c.shape, Some(&wild), &cfg).unwrap();
    let vanilla = recover_with_prior(&c.obs, &c.omega, &c.shape, None, &cfg).unwrap();
    assert_eq!(guarded.z, vanilla.z);
    assert_eq!(guarded.iters, vanilla.iters);
}

#[test]
fn over_specified_rank_still_recovers() {
    let mut ok = 0;
    for t in 0..10u64 {
        let c = case(&[32], 2, 24, 0.1, derive_seed(8, t));
        let mut cfg = AdmmConfig::new(3);
        cfg.max_iters = 2000;
        let res = recover_with_prior(&c.obs, &c.omega, &c.shape, Some(&c.phi), &cfg).unwrap();
        for k in c.omega.distinct() {
            assert_eq!(res.z.values()[k], c.obs.values()[k]);
        }
        if res.z.relative_error(&c.x) < 1e-2 {
            ok += 1;
        }
    }
    assert!(ok >= 8, "rank r+1 recovered {ok}/10");
}

#[test]
fn admm_history_is_recorded() {
    let c = case(&[24], 2, 14, 0.1, 9);
    let cfg = AdmmConfig::new(2);
    let init = init_factors(&c.obs, &c.omega, &c.shape, Some(&c.phi), &cfg).unwrap();
    assert_eq!(init.branch, InitBranch::Prior);
    let res = admm_recover(&c.obs, &c.omega, &c.shape, &init, &cfg).unwrap();
    assert_eq!(res.primal_residuals.len(), res.iters);
    assert_eq!(res.objective_history.len(), res.iters);
    assert!(res.wall_time >= 0.0);
}

#[test]
fn vanilla_failure_shows_in_pencil_residual() {
    let mut contrasts = 0;
    for t in 0..10u64 {
        let c = case(&[32], 3, 10, 0.5, derive_seed(10, t));
        let cfg = AdmmConfig::new(3);
        let good = recover_with_prior(&c.obs, &c.omega, &c.shape, Some(&c.phi), &cfg).unwrap();
        let bad = convex_recover(&c.obs, &c.omega, &c.shape, &PriorLift::zero(&c.shape), None, &ConvexConfig::default())
            .unwrap();
        if good.z.relative_error(&c.x) >= 1e-2 || bad.z.relative_error(&c.x) <= 1e-2 {
            continue;
        }
        let rg = matrix_pencil(&good.z, 3, None).unwrap().residual;
        let rb = matrix_pencil(&bad.z, 3, None).unwrap().residual;
        assert!(rb > 100.0 * rg, "trial {t}: vanilla residual {rb:e} vs prior-aided {rg:e}");
        contrasts += 1;
    }
    assert!(contrasts >= 5, "only {contrasts} contrasting trials");
}

#[test]
fn two_dim_round_trip_residual() {
    for t in 0..20u64 {
        let model = RandomModel { dims: vec![10, 10], rank: 3, min_separation: Some(0.1), amplitudes: Default::default() }
            .generate::<f64>(derive_seed(11, t))
            .unwrap();
        let est = estimate_2d(&model.synthesize(), 3).unwrap();
        assert!(est.residual < 1e-6, "trial {t}: residual {:e}", est.residual);
        assert_eq!(est.freqs.len(), 3);
    }
}
