//! Algebraic property suite for the hyperspace primitives. Runs standalone
//! in seconds — no dataset, no files.

use proptest::prelude::*;

use tachd::encoding::{Encoder, EncoderConfig, EncoderVariant};
use tachd::hv::{
    bind, bundle, cosine_sim, permute, random_hv, Hypervector, LevelBasis, RandomBasis,
};
use tachd::model::AssociativeMemory;
use tachd::rng::Rng;

const D: usize = 10_000;

fn rand_pair(seed: u64, d: usize) -> (Hypervector, Hypervector) {
    let mut rng = Rng::from_seed(seed);
    (random_hv(&mut rng, d).unwrap(), random_hv(&mut rng, d).unwrap())
}

#[test]
fn bind_is_self_inverse() {
    let (a, b) = rand_pair(1, D);
    // a ⊗ a is the identity vector...
    let aa = bind(&a, &a).unwrap();
    assert!(aa.as_slice().iter().all(|&v| v == 1.0));
    // ...so binding the same operand twice recovers the other exactly.
    let roundtrip = bind(&bind(&a, &b).unwrap(), &b).unwrap();
    assert_eq!(roundtrip, a);
    // And the bound pair resembles neither operand.
    let ab = bind(&a, &b).unwrap();
    assert!(cosine_sim(&ab, &a).unwrap().abs() < 0.05);
    assert!(cosine_sim(&ab, &b).unwrap().abs() < 0.05);
}

#[test]
fn permute_is_invertible() {
    let (h, _) = rand_pair(2, D);
    for shift in [0i64, 1, 17, 399, D as i64, D as i64 + 3, -5] {
        assert_eq!(permute(&permute(&h, shift), -shift), h, "shift {shift}");
    }
    // A nonzero shift decorrelates the vector from itself.
    assert!(cosine_sim(&permute(&h, 1), &h).unwrap().abs() < 0.05);
}

#[test]
fn bundle_stays_similar_to_every_member() {
    // cos(member, bundle of k) concentrates near 1/sqrt(k); the null
    // distribution for unrelated vectors has sigma = 1/sqrt(d). Demand the
    // five-sigma separation with k = 32: 1/sqrt(32) = 0.177 >> 5/sqrt(10000).
    let mut rng = Rng::from_seed(3);
    let members: Vec<Hypervector> =
        (0..32).map(|_| random_hv(&mut rng, D).unwrap()).collect();
    let sum = bundle(&members).unwrap();
    let five_sigma = 5.0 / (D as f32).sqrt();
    for (i, m) in members.iter().enumerate() {
        let s = cosine_sim(&sum, m).unwrap();
        assert!(s >= five_sigma, "member {i}: cos {s} below {five_sigma}");
    }
    // An unrelated vector stays inside the noise band.
    let outsider = random_hv(&mut rng, D).unwrap();
    assert!(cosine_sim(&sum, &outsider).unwrap().abs() < five_sigma);
}

#[test]
fn random_vectors_are_quasi_orthogonal() {
    // |cos| of two random bipolar vectors is sub-Gaussian with
    // sigma = 1/sqrt(d) = 0.01, so 0.05 is a five-sigma cut. 99% of 1000
    // trials must pass; in practice all of them do.
    let mut rng = Rng::from_seed(4);
    let mut inside = 0;
    for _ in 0..1000 {
        let a = random_hv(&mut rng, D).unwrap();
        let b = random_hv(&mut rng, D).unwrap();
        if cosine_sim(&a, &b).unwrap().abs() <= 0.05 {
            inside += 1;
        }
    }
    assert!(inside >= 990, "only {inside}/1000 pairs inside |cos| <= 0.05");
}

#[test]
fn level_basis_similarity_is_monotone_in_level_distance() {
    let mut rng = Rng::from_seed(5);
    let levels = 20;
    let basis = LevelBasis::new(&mut rng, D, levels, 0.0, 1.0).unwrap();
    // Nested flips make cos(L0, Lj) exactly non-increasing in j.
    let mut prev = f32::INFINITY;
    for j in 0..levels {
        let s = cosine_sim(basis.vector(0), basis.vector(j)).unwrap();
        assert!(s <= prev + 1e-6, "level {j}: {s} > {prev}");
        prev = s;
    }
    // Neighbours stay close; the extremes look like unrelated vectors.
    for j in 0..levels - 1 {
        let s = cosine_sim(basis.vector(j), basis.vector(j + 1)).unwrap();
        assert!(s > 0.8, "adjacent levels {j},{} at cos {s}", j + 1);
    }
    let ends = cosine_sim(basis.vector(0), basis.vector(levels - 1)).unwrap();
    assert!(ends.abs() < 0.05, "extreme levels at cos {ends}");
}

#[test]
fn ngram_composition_is_order_sensitive() {
    // The trigram chain rho^2(a) * rho(b) * c against its reversal.
    let mut rng = Rng::from_seed(6);
    let a = random_hv(&mut rng, D).unwrap();
    let b = random_hv(&mut rng, D).unwrap();
    let c = random_hv(&mut rng, D).unwrap();
    let chain = |x: &Hypervector, y: &Hypervector, z: &Hypervector| {
        bind(&bind(&permute(x, 2), &permute(y, 1)).unwrap(), z).unwrap()
    };
    let fwd = chain(&a, &b, &c);
    let rev = chain(&c, &b, &a);
    assert!(cosine_sim(&fwd, &rev).unwrap().abs() < 0.05);
    assert_eq!(chain(&a, &b, &c), fwd);
}

#[test]
fn generic_encoder_separates_reversed_windows() {
    use tachd::features::RawWindow;

    let cfg = EncoderConfig {
        variant: EncoderVariant::Generic,
        dim: D,
        ngram: 4,
        levels: 16,
        seed: 11,
        window_len: 400,
        axis_ranges: [(-2.0, 2.0); 3],
        ..EncoderConfig::default()
    };
    let enc = Encoder::new(cfg).unwrap();
    let mut rng = Rng::from_seed(12);
    let mut draw = |n: usize| -> Vec<[f32; 3]> {
        (0..n)
            .map(|_| {
                [
                    rng.uniform(-2.0, 2.0) as f32,
                    rng.uniform(-2.0, 2.0) as f32,
                    rng.uniform(-2.0, 2.0) as f32,
                ]
            })
            .collect()
    };
    let samples = draw(400);
    let fwd = RawWindow::with_nominal_times("T", 0, samples.clone()).unwrap();
    let rev =
        RawWindow::with_nominal_times("T", 0, samples.into_iter().rev().collect()).unwrap();
    let other = RawWindow::with_nominal_times("T", 0, draw(400)).unwrap();
    let hf = enc.encode_parts(Some(&fwd), None).unwrap();
    let hr = enc.encode_parts(Some(&rev), None).unwrap();
    let ho = enc.encode_parts(Some(&other), None).unwrap();
    // Level-map symbols are not zero-mean, so every n-gram bundle shares a
    // large bias vector and raw cosines between windows sit near 1. The
    // discriminative signal is the residual above that bias; measure order
    // sensitivity as cosine drop relative to a whole-content replacement.
    let drop_rev = 1.0 - cosine_sim(&hf, &hr).unwrap();
    let drop_other = 1.0 - cosine_sim(&hf, &ho).unwrap();
    assert!(drop_other > 0.0);
    assert!(
        drop_rev >= 0.3 * drop_other,
        "reversal drop {drop_rev} vs replacement drop {drop_other}"
    );
    assert_eq!(enc.encode_parts(Some(&fwd), None).unwrap(), hf);
}

#[test]
fn prediction_is_scale_invariant() {
    let mut rng = Rng::from_seed(7);
    let c0 = random_hv(&mut rng, D).unwrap();
    let c1 = random_hv(&mut rng, D).unwrap();

    let mut unit = AssociativeMemory::new(D, 2).unwrap();
    unit.add(0, &c0, 1.0).unwrap();
    unit.add(1, &c1, 1.0).unwrap();
    let mut scaled = AssociativeMemory::new(D, 2).unwrap();
    scaled.add(0, &c0, 250.0).unwrap();
    scaled.add(1, &c1, 0.125).unwrap();

    for i in 0..50 {
        // Queries biased toward one prototype plus noise.
        let noise = random_hv(&mut rng, D).unwrap();
        let mut q = if i % 2 == 0 { c0.clone() } else { c1.clone() };
        q.scaled_add(&noise, 0.8);
        let (pu, _) = unit.predict(&q).unwrap();
        let (ps, _) = scaled.predict(&q).unwrap();
        assert_eq!(pu, ps, "query {i}");
        assert_eq!(pu, i % 2);
    }
}

#[test]
fn equal_seeds_reproduce_everything_unequal_seeds_do_not() {
    let cfg = EncoderConfig {
        variant: EncoderVariant::Generic,
        dim: 2_000,
        ngram: 3,
        levels: 12,
        seed: 99,
        window_len: 40,
        axis_ranges: [(-1.0, 1.0); 3],
        ..EncoderConfig::default()
    };
    let mut rng = Rng::from_seed(8);
    let samples: Vec<[f32; 3]> = (0..40)
        .map(|_| {
            [
                rng.uniform(-1.0, 1.0) as f32,
                rng.uniform(-1.0, 1.0) as f32,
                rng.uniform(-1.0, 1.0) as f32,
            ]
        })
        .collect();
    let w = tachd::features::RawWindow::with_nominal_times("T", 0, samples).unwrap();

    let a = Encoder::new(cfg.clone()).unwrap().encode_parts(Some(&w), None).unwrap();
    let b = Encoder::new(cfg.clone()).unwrap().encode_parts(Some(&w), None).unwrap();
    assert_eq!(a, b);

    let other = Encoder::new(EncoderConfig { seed: 100, ..cfg }).unwrap();
    let c = other.encode_parts(Some(&w), None).unwrap();
    assert_ne!(a, c);
    assert!(cosine_sim(&a, &c).unwrap().abs() < 0.1);
}

#[test]
fn basis_regeneration_changes_only_requested_dims() {
    let mut rng = Rng::from_seed(13);
    let mut basis = RandomBasis::new(&mut rng, 512, 4).unwrap();
    let before: Vec<Vec<f32>> =
        (0..4).map(|i| basis.vector(i).as_slice().to_vec()).collect();
    let dims = [3usize, 200, 511];
    let mut regen = Rng::from_seed(14);
    basis.regenerate_dims(&dims, &mut regen);
    for i in 0..4 {
        for (j, &v) in basis.vector(i).as_slice().iter().enumerate() {
            assert!(v == 1.0 || v == -1.0);
            if !dims.contains(&j) {
                assert_eq!(v, before[i][j], "vector {i} dim {j} moved");
            }
        }
    }
}

proptest! {
    #[test]
    fn prop_bind_roundtrip(seed in 0u64..1000, d in 1usize..256) {
        let (a, b) = rand_pair(seed, d);
        prop_assert_eq!(bind(&bind(&a, &b).unwrap(), &b).unwrap(), a);
    }

    #[test]
    fn prop_permute_roundtrip(seed in 0u64..1000, d in 1usize..256, shift in -500i64..500) {
        let (h, _) = rand_pair(seed, d);
        prop_assert_eq!(permute(&permute(&h, shift), -shift), h);
    }

    #[test]
    fn prop_bind_commutes_and_distributes(seed in 0u64..1000, d in 1usize..128) {
        let mut rng = Rng::from_seed(seed);
        let a = random_hv(&mut rng, d).unwrap();
        let b = random_hv(&mut rng, d).unwrap();
        let c = random_hv(&mut rng, d).unwrap();
        prop_assert_eq!(bind(&a, &b).unwrap(), bind(&b, &a).unwrap());
        // a * (b + c) == a*b + a*c, elementwise over integer-valued f32.
        let sum = bundle(&[b.clone(), c.clone()]).unwrap();
        let lhs = bind(&a, &sum).unwrap();
        let rhs = bundle(&[bind(&a, &b).unwrap(), bind(&a, &c).unwrap()]).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn prop_cosine_bounded(seed in 0u64..1000, d in 1usize..256) {
        let (a, b) = rand_pair(seed, d);
        let s = cosine_sim(&a, &b).unwrap();
        prop_assert!((-1.0 - 1e-6..=1.0 + 1e-6).contains(&s));
        prop_assert!((cosine_sim(&a, &a).unwrap() - 1.0).abs() < 1e-6);
    }
}
