use hankel_prior::diagnostics::TangentSpace;
use hankel_prior::hankel::{hankel_project, lift, sampling_op, unlift, unlift_adjoint};
use hankel_prior::linalg::{frobenius, inner, spectral_norm, SortedSvd};
use hankel_prior::prior::{build_prior_lift, default_rank_tol, sign_matrix};
use hankel_prior::signal::{ComplexSignal, SpectralModel, Term};
use hankel_prior::spectral::matrix_pencil;
use hankel_prior::{mask, CMatrix, Complex, HankelShape, SampleSet, SamplingLaw, Variant};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn complex() -> impl Strategy<Value = Complex<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c(re, im))
}

/// A lift shape together with a signal and a matrix of matching sizes.
fn shape_signal_matrix() -> impl Strategy<Value = (HankelShape, ComplexSignal<f64>, CMatrix<f64>)> {
    let one_d = (1usize..=12, any::<prop::sample::Index>(), any::<bool>()).prop_map(|(n, d, wrap)| {
        let d = d.index(n) + 1;
        if wrap {
            HankelShape::wrap_around(n, d).unwrap()
        } else {
            HankelShape::standard(n, d).unwrap()
        }
    });
    let two_d = (1usize..=5, 1usize..=5, any::<prop::sample::Index>(), any::<prop::sample::Index>()).prop_map(
        |(n0, n1, p0, p1)| HankelShape::new(vec![n0, n1], vec![p0.index(n0) + 1, p1.index(n1) + 1], Variant::Standard).unwrap(),
    );
    prop_oneof![one_d, two_d].prop_flat_map(|shape| {
        let n = shape.signal_len();
        let cells = shape.rows() * shape.cols();
        let dims = shape.dims().to_vec();
        let (rows, cols) = (shape.rows(), shape.cols());
        (Just(shape), prop::collection::vec(complex(), n), prop::collection::vec(complex(), cells)).prop_map(
            move |(shape, xs, ms)| {
                let x = ComplexSignal::new(dims.clone(), xs).unwrap();
                let m = CMatrix::from_row_slice(rows, cols, &ms);
                (shape, x, m)
            },
        )
    })
}

fn sample_set(n: usize) -> impl Strategy<Value = SampleSet> {
    prop::collection::vec(0..n, 0..2 * n).prop_map(move |idx| SampleSet::new(vec![n], SamplingLaw::Iid, idx).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn synthesize_is_linear_in_amplitudes(
        terms in prop::collection::vec((0.0..1.0f64, complex(), complex()), 1..5),
        n in 1usize..40,
    ) {
        let freqs: Vec<f64> = terms.iter().map(|t| t.0).collect();
        let a: Vec<Complex<f64>> = terms.iter().map(|t| t.1).collect();
        let b: Vec<Complex<f64>> = terms.iter().map(|t| t.2).collect();
        let ab: Vec<Complex<f64>> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        // Distinctness is a model invariant; skip draws that collide.
        prop_assume!(SpectralModel::one_dim(n, &freqs, &a).is_ok());
        let sa = SpectralModel::one_dim(n, &freqs, &a).unwrap().synthesize();
        let sb = SpectralModel::one_dim(n, &freqs, &b).unwrap().synthesize();
        let sab = SpectralModel::one_dim(n, &freqs, &ab).unwrap().synthesize();
        for k in 0..n {
            prop_assert!((sab.values()[k] - sa.values()[k] - sb.values()[k]).norm() <= 1e-12);
        }
    }

    #[test]
    fn synthesize_matches_direct_sum(f0 in 0.0..1.0f64, f1 in 0.0..1.0f64, a in complex(), n0 in 1usize..6, n1 in 1usize..6) {
        let model = SpectralModel::new(vec![n0, n1], vec![Term { freq: vec![f0, f1], amp: a }]).unwrap();
        let x = model.synthesize();
        for k0 in 0..n0 {
            for k1 in 0..n1 {
                let phase = 2.0 * std::f64::consts::PI * (k0 as f64 * f0 + k1 as f64 * f1);
                let want = a * c(phase.cos(), phase.sin());
                prop_assert!((x.values()[k0 * n1 + k1] - want).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn mask_is_idempotent(xs in prop::collection::vec(complex(), 1..20), seed in any::<u64>()) {
        let n = xs.len();
        let x = ComplexSignal::new(vec![n], xs).unwrap();
        let omega = hankel_prior::draw_samples(&[n], 1 + (seed as usize % (2 * n)), SamplingLaw::Iid, seed).unwrap();
        let once = mask(&x, &omega).unwrap();
        prop_assert_eq!(mask(&once, &omega).unwrap(), once.clone());
        let keep = omega.indicator();
        for k in 0..n {
            let want = if keep[k] { x.values()[k] } else { c(0.0, 0.0) };
            prop_assert_eq!(once.values()[k], want);
        }
    }

    #[test]
    fn draws_are_bit_identical(n in 1usize..50, m in 1usize..60, seed in any::<u64>(), iid in any::<bool>()) {
        let law = if iid { SamplingLaw::Iid } else { SamplingLaw::WithoutReplacement };
        let m = if iid { m } else { m.min(n) };
        let a = hankel_prior::draw_samples(&[n], m, law, seed).unwrap();
        let b = hankel_prior::draw_samples(&[n], m, law, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.m(), m);
        prop_assert!(a.indices().iter().all(|&k| k < n));
        if !iid {
            prop_assert_eq!(a.distinct().len(), m);
        }
    }

    #[test]
    fn unlift_inverts_lift((shape, x, _m) in shape_signal_matrix()) {
        let back = unlift(&lift(&x, &shape).unwrap(), &shape).unwrap();
        prop_assert!(back.distance(&x) <= 1e-12 * x.norm().max(1.0));
    }

    #[test]
    fn adjoint_identity((shape, x, m) in shape_signal_matrix()) {
        let lhs = inner(&lift(&x, &shape).unwrap(), &m);
        let adj = unlift_adjoint(&m, &shape).unwrap();
        let rhs: Complex<f64> = x.values().iter().zip(adj.values()).map(|(a, b)| a * b.conj()).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        // H† is the weight-normalised adjoint.
        let pinv = unlift(&m, &shape).unwrap();
        for (k, w) in shape.weights().iter().enumerate() {
            prop_assert!((pinv.values()[k] * *w as f64 - adj.values()[k]).norm() <= 1e-12 * adj.values()[k].norm().max(1.0));
        }
    }

    #[test]
    fn weights_match_brute_force_count((shape, _x, _m) in shape_signal_matrix()) {
        // Lift a signal tagged with its own indices and count where each lands.
        let n = shape.signal_len();
        let tagged = ComplexSignal::new(shape.dims().to_vec(), (0..n).map(|k| c(k as f64, 0.0)).collect()).unwrap();
        let h = lift(&tagged, &shape).unwrap();
        let mut counts = vec![0usize; n];
        for v in h.iter() {
            counts[v.re as usize] += 1;
        }
        prop_assert_eq!(shape.weights(), &counts[..]);
        if shape.variant() == Variant::WrapAround {
            prop_assert!(shape.weights().iter().all(|&w| w == shape.pencils()[0]));
        }
    }

    #[test]
    fn hankel_projection_is_orthogonal((shape, x, m) in shape_signal_matrix()) {
        let p = hankel_project(&m, &shape).unwrap();
        let pp = hankel_project(&p, &shape).unwrap();
        prop_assert!(frobenius(&(&pp - &p)) <= 1e-12 * frobenius(&m).max(1.0));
        // The residual is orthogonal to every Hankel matrix.
        let h = lift(&x, &shape).unwrap();
        prop_assert!(inner(&(&m - &p), &h).norm() <= 1e-10 * frobenius(&m).max(1.0) * frobenius(&h).max(1.0));
    }

    #[test]
    fn distinct_sampling_op_is_projection(omega in (2usize..16).prop_flat_map(sample_set), seed in any::<u64>()) {
        let n = omega.dims()[0];
        let shape = HankelShape::with_default_pencils(vec![n], Variant::Standard).unwrap();
        let m = {
            let mut rng = hankel_prior::rng::rng_from_seed(seed);
            CMatrix::<f64>::from_fn(shape.rows(), shape.cols(), |_, _| hankel_prior::rng::complex_normal(&mut rng))
        };
        let once = sampling_op(&m, &omega, &shape, false).unwrap();
        let twice = sampling_op(&once, &omega, &shape, false).unwrap();
        prop_assert!(frobenius(&(&twice - &once)) <= 1e-12 * frobenius(&m));
        let keep = omega.indicator();
        let rest: Vec<usize> = (0..n).filter(|&k| !keep[k]).collect();
        let complement = SampleSet::new(vec![n], SamplingLaw::WithoutReplacement, rest).unwrap();
        prop_assert!(frobenius(&sampling_op(&once, &complement, &shape, false).unwrap()) <= 1e-12 * frobenius(&m));
    }

    #[test]
    fn sign_matrix_is_idempotent(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let mut rng = hankel_prior::rng::rng_from_seed(seed);
        let x: CMatrix<f64> = CMatrix::from_fn(rows, cols, |_, _| hankel_prior::rng::complex_normal(&mut rng));
        let s = sign_matrix(&x, 1e-10).unwrap();
        prop_assert!((spectral_norm(&s) - 1.0).abs() <= 1e-10);
        let ss = sign_matrix(&s, 1e-10).unwrap();
        prop_assert!(frobenius(&(&ss - &s)) <= 1e-10);
    }

    #[test]
    fn prior_lift_has_binary_spectrum(xs in prop::collection::vec(complex(), 4..20), rank in 1usize..4) {
        let n = xs.len();
        let phi = ComplexSignal::new(vec![n], xs).unwrap();
        let shape = HankelShape::with_default_pencils(vec![n], Variant::Standard).unwrap();
        let rank = rank.min(shape.rows().min(shape.cols()));
        let prior = build_prior_lift(&phi, &shape, 1.0, rank).unwrap();
        let s = SortedSvd::new(&prior.g).singular_values;
        prop_assert!(s.iter().all(|v| v.abs() <= 1e-10 || (v - 1.0).abs() <= 1e-10));
        prop_assert!(s.iter().filter(|v| **v > 0.5).count() <= rank);
    }

    #[test]
    fn f0_is_quadratic_in_lambda(
        freqs in prop::collection::btree_set(0usize..64, 1..4),
        noise in prop::collection::vec(complex(), 24),
        lambda in 0.0..2.0f64,
    ) {
        let n = 24;
        let freqs: Vec<f64> = freqs.iter().map(|&k| k as f64 / 64.0).collect();
        let amps = vec![c(1.0, 0.0); freqs.len()];
        let x = SpectralModel::one_dim(n, &freqs, &amps).unwrap().synthesize();
        let phi = x.zip_with(&ComplexSignal::new(vec![n], noise).unwrap(), |a, e| a + e.scale(0.3));
        let shape = HankelShape::with_default_pencils(vec![n], Variant::Standard).unwrap();
        let t = TangentSpace::from_matrix(&lift(&x, &shape).unwrap(), default_rank_tol()).unwrap();
        let g = build_prior_lift(&phi, &shape, 1.0, freqs.len()).unwrap().g;
        let sign = t.sign();
        let f0 = frobenius(&t.project(&(&sign - g.scale(lambda))));
        let ptg = frobenius(&t.project(&g));
        let pts = frobenius(&t.project(&sign));
        let cross = inner(&t.project(&sign), &g).re;
        let expanded = lambda * lambda * ptg * ptg + pts * pts - 2.0 * lambda * cross;
        prop_assert!((f0 * f0 - expanded).abs() <= 1e-10);
    }

    #[test]
    fn tangent_projections_split_identity(
        freqs in prop::collection::btree_set(0usize..64, 1..4),
        seed in any::<u64>(),
    ) {
        let n = 20;
        let freqs: Vec<f64> = freqs.iter().map(|&k| k as f64 / 64.0).collect();
        let amps = vec![c(1.0, 0.0); freqs.len()];
        let x = SpectralModel::one_dim(n, &freqs, &amps).unwrap().synthesize();
        let shape = HankelShape::with_default_pencils(vec![n], Variant::Standard).unwrap();
        let h = lift(&x, &shape).unwrap();
        let t = TangentSpace::from_matrix(&h, default_rank_tol()).unwrap();
        let mut rng = hankel_prior::rng::rng_from_seed(seed);
        let m: CMatrix<f64> = CMatrix::from_fn(shape.rows(), shape.cols(), |_, _| hankel_prior::rng::complex_normal(&mut rng));
        let p = t.project(&m);
        let q = t.project_complement(&m);
        prop_assert!(frobenius(&(&p + &q - &m)) <= 1e-12 * frobenius(&m));
        prop_assert!(frobenius(&t.project(&q)) <= 1e-12 * frobenius(&m));
        prop_assert!(frobenius(&(t.project(&p) - &p)) <= 1e-12 * frobenius(&m));
        prop_assert!(frobenius(&(t.project(&h) - &h)) <= 1e-10 * frobenius(&h));
    }

    #[test]
    fn pencil_round_trip_on_separated_grid(
        slots in prop::collection::btree_set(0usize..16, 1..4),
        offset in 0.0..1.0f64,
        phases in prop::collection::vec(0.0..1.0f64, 3),
    ) {
        // Frequencies on a shifted grid of spacing 2/n keep the separation above 1/n.
        let n = 32;
        let r = slots.len();
        let freqs: Vec<f64> = slots.iter().map(|&s| ((s as f64 * 2.0 + offset) / n as f64).fract()).collect();
        let amps: Vec<Complex<f64>> = phases[..r].iter().map(|p| Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * p)).collect();
        let model = SpectralModel::one_dim(n, &freqs, &amps).unwrap();
        let est = matrix_pencil(&model.synthesize(), r, None).unwrap();
        prop_assert!(est.freqs.iter().all(|f| f[0] >= 0.0 && f[0] < 1.0));
        prop_assert!(est.freqs.windows(2).all(|w| w[0] <= w[1]));
        let truth: Vec<Vec<f64>> = freqs.iter().map(|f| vec![*f]).collect();
        let (ef, ea) = hankel_prior::spectral::match_errors(&est, &truth, &amps);
        prop_assert!(ef < 1e-6 && ea < 1e-6, "freq err {} amp err {}", ef, ea);
    }
}
