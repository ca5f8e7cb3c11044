//! Cross-module property tests: randomized invariants that tie the
//! functional calculus, the maps, the generators, and the chain checkers
//! together.

use proptest::prelude::*;

use opineq::checks::{
    check_chord_sum, check_kantorovich, check_power_refinement, check_refined_kantorovich,
    check_squared, ChainReport, Tolerance,
};
use opineq::gen::{self, instantiate, InstanceRecipe, MapStyle, SpectrumStyle};
use opineq::hermitian::{chord_operator, loewner_leq, HermitianMatrix, SpectrumBounds};
use opineq::scalar::{
    classical_kantorovich, kantorovich_constant, linear_chord, mu_constant, ScalarFunction,
};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn arb_bounds() -> impl Strategy<Value = SpectrumBounds> {
    (0.05f64..5.0, 1.01f64..50.0)
        .prop_map(|(m, ratio)| SpectrumBounds::new(m, m * ratio).unwrap())
}

fn arb_spectrum_style() -> impl Strategy<Value = SpectrumStyle> {
    prop_oneof![
        Just(SpectrumStyle::UniformInBand),
        Just(SpectrumStyle::TwoPoint),
        Just(SpectrumStyle::EndpointPinned),
        Just(SpectrumStyle::Clustered),
    ]
}

fn arb_map_style() -> impl Strategy<Value = MapStyle> {
    prop_oneof![
        Just(MapStyle::Trace),
        Just(MapStyle::Pinching),
        Just(MapStyle::Compression),
        (1usize..=4).prop_map(MapStyle::Kraus),
        (1usize..=4).prop_map(MapStyle::UnitaryMixture),
    ]
}

fn arb_recipe() -> impl Strategy<Value = InstanceRecipe> {
    (2usize..=8, arb_bounds(), arb_spectrum_style(), arb_map_style(), any::<u64>()).prop_map(
        |(dim, bounds, spectrum_style, map_style, seed)| InstanceRecipe {
            dim,
            bounds,
            spectrum_style,
            map_style,
            seed,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn generated_spectra_stay_inside_the_band(recipe in arb_recipe()) {
        let inst = instantiate(&recipe).unwrap();
        let (m, upper) = recipe.bounds.pair();
        let lower = HermitianMatrix::identity(recipe.dim).scale(m);
        let upper_mat = HermitianMatrix::identity(recipe.dim).scale(upper);
        prop_assert!(loewner_leq(&lower, &inst.matrix, 1e-9, 1e-10).unwrap().holds);
        prop_assert!(loewner_leq(&inst.matrix, &upper_mat, 1e-9, 1e-10).unwrap().holds);
        let decomp = inst.matrix.spectral_decompose();
        prop_assert!(recipe.bounds.brackets(decomp.eigenvalues()).is_ok());
    }

    #[test]
    fn maps_are_unital_positive_and_order_preserving(recipe in arb_recipe()) {
        let inst = instantiate(&recipe).unwrap();
        let phi = &inst.map;

        let id_in = HermitianMatrix::identity(phi.input_dim());
        let id_out = HermitianMatrix::identity(phi.output_dim());
        let residual = phi.apply(&id_in).unwrap().sub(&id_out).unwrap().operator_norm();
        prop_assert!(residual <= 1e-9, "unitality residual {residual}");

        let mut rng = rand_stream(recipe.seed);
        let psd = gen::random_psd_with(phi.input_dim(), 4.0, &mut rng).unwrap();
        let image = phi.apply(&psd).unwrap();
        let scale = image.operator_norm().max(1.0);
        prop_assert!(image.min_eigenvalue() >= -(1e-10 + 1e-9 * scale));

        let bump = gen::random_psd_with(phi.input_dim(), 2.0, &mut rng).unwrap();
        let bigger = psd.add(&bump).unwrap();
        let v = loewner_leq(
            &phi.apply(&psd).unwrap(),
            &phi.apply(&bigger).unwrap(),
            1e-9,
            1e-10,
        )
        .unwrap();
        prop_assert!(v.holds, "order violated with gap {}", v.gap);
    }

    #[test]
    fn maps_are_linear(recipe in arb_recipe(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let inst = instantiate(&recipe).unwrap();
        let phi = &inst.map;
        let mut rng = rand_stream(recipe.seed ^ 0xA5A5);
        let x = gen::random_psd_with(phi.input_dim(), 3.0, &mut rng).unwrap();
        let y = gen::random_psd_with(phi.input_dim(), 3.0, &mut rng).unwrap();
        let combined = phi.apply(&x.scale(alpha).add(&y.scale(beta)).unwrap()).unwrap();
        let separate = phi.apply(&x).unwrap().scale(alpha)
            .add(&phi.apply(&y).unwrap().scale(beta)).unwrap();
        let diff = combined.sub(&separate).unwrap().operator_norm();
        let scale = combined.operator_norm().max(1.0);
        prop_assert!(diff <= 1e-10 * scale, "linearity residual {diff}");
    }

    #[test]
    fn power_functional_calculus_is_multiplicative(
        bounds in arb_bounds(),
        p1 in -1.5f64..1.5,
        p2 in -1.5f64..1.5,
        seed in any::<u64>(),
    ) {
        let recipe = InstanceRecipe {
            dim: 4,
            bounds,
            spectrum_style: SpectrumStyle::UniformInBand,
            map_style: MapStyle::Trace,
            seed,
        };
        let a = gen::random_hermitian_in_band(&recipe).unwrap();
        let fa = a.map_eigenvalues(|l| Ok(l.powf(p1))).unwrap();
        let ga = a.map_eigenvalues(|l| Ok(l.powf(p2))).unwrap();
        let product = HermitianMatrix::from_symmetrized(fa.matrix() * ga.matrix()).unwrap();
        let fused = a.map_eigenvalues(|l| Ok(l.powf(p1) * l.powf(p2))).unwrap();
        let diff = product.sub(&fused).unwrap().operator_norm();
        let scale = fused.operator_norm().max(1.0);
        prop_assert!(diff <= 1e-9 * scale, "homomorphism residual {diff}");
    }

    #[test]
    fn loewner_order_is_reflexive_and_transitive(dim in 1usize..=8, seed in any::<u64>()) {
        let mut rng = rand_stream(seed);
        let a = gen::random_psd_with(dim, 3.0, &mut rng).unwrap();
        let refl = loewner_leq(&a, &a, 1e-9, 1e-10).unwrap();
        prop_assert!(refl.holds);
        prop_assert!(refl.gap.abs() <= 1e-12);

        let b = a.add(&gen::random_psd_with(dim, 2.0, &mut rng).unwrap()).unwrap();
        let c = b.add(&gen::random_psd_with(dim, 2.0, &mut rng).unwrap()).unwrap();
        prop_assert!(loewner_leq(&a, &b, 1e-9, 1e-10).unwrap().holds);
        prop_assert!(loewner_leq(&b, &c, 1e-9, 1e-10).unwrap().holds);
        prop_assert!(loewner_leq(&a, &c, 1e-9, 1e-10).unwrap().holds);
    }

    #[test]
    fn chords_sandwich_at_operator_level(recipe in arb_recipe(), which in 0usize..3) {
        let f = match which {
            0 => ScalarFunction::inverse(),
            1 => ScalarFunction::power(-2.0),
            _ => ScalarFunction::exp_neg(),
        };
        let a = gen::random_hermitian_in_band(&recipe).unwrap();
        let bounds = &recipe.bounds;
        let (m, upper) = bounds.pair();
        let fa = a.apply_function(&f).unwrap();
        let chord = chord_operator(&a, bounds, &f).unwrap();
        let linear = a
            .map_eigenvalues(|l| linear_chord(l.clamp(m, upper), bounds, &f))
            .unwrap();
        prop_assert!(loewner_leq(&fa, &chord, 1e-9, 1e-10).unwrap().holds);
        prop_assert!(loewner_leq(&chord, &linear, 1e-9, 1e-10).unwrap().holds);
    }

    #[test]
    fn mu_for_inverse_matches_the_closed_form(bounds in arb_bounds()) {
        let mu = mu_constant(&bounds, &ScalarFunction::inverse()).unwrap();
        let k = classical_kantorovich(&bounds);
        prop_assert!((mu - k).abs() / k <= 1e-8, "mu {mu} vs closed form {k}");
        prop_assert!(mu >= 1.0 - 1e-12);
    }

    #[test]
    fn power_constant_reduces_to_classical_at_minus_one(bounds in arb_bounds()) {
        let k = kantorovich_constant(&bounds, -1.0).unwrap();
        let classical = classical_kantorovich(&bounds);
        prop_assert!((k - classical).abs() / classical <= 1e-12);
    }

    #[test]
    fn classical_and_refined_chains_hold_with_dominated_slack(recipe in arb_recipe()) {
        let inst = instantiate(&recipe).unwrap();
        let bounds = &recipe.bounds;
        let classical = check_kantorovich(&inst.matrix, &inst.map, bounds, tol()).unwrap();
        let refined = check_refined_kantorovich(&inst.matrix, &inst.map, bounds, tol()).unwrap();
        prop_assert!(classical.all_hold, "classical failed: {classical:?}");
        prop_assert!(refined.all_hold, "refined failed: {refined:?}");
        // The chord middle term can only tighten the classical bound.
        prop_assert!(
            classical.links[0].gap >= refined.links[1].gap - 1e-9,
            "classical slack {} < refined final gap {}",
            classical.links[0].gap,
            refined.links[1].gap
        );
    }

    #[test]
    fn chord_sum_chain_holds(recipe in arb_recipe()) {
        let inst = instantiate(&recipe).unwrap();
        let report = check_chord_sum(&inst.matrix, &inst.map, &recipe.bounds, tol()).unwrap();
        prop_assert!(report.all_hold, "{report:?}");
    }

    #[test]
    fn power_and_squared_chains_hold(
        recipe in arb_recipe(),
        p_neg in -4.0f64..-0.25,
        p_big in 2.0f64..8.0,
    ) {
        let inst = instantiate(&recipe).unwrap();
        let bounds = &recipe.bounds;
        let power = check_power_refinement(&inst.matrix, &inst.map, bounds, p_neg, tol()).unwrap();
        prop_assert!(power.all_hold, "power p={p_neg}: {power:?}");
        let squared = check_squared(&inst.matrix, &inst.map, bounds, p_big, tol()).unwrap();
        prop_assert!(squared.all_hold, "squared p={p_big}: {squared:?}");
    }

    #[test]
    fn instances_and_reports_are_deterministic(recipe in arb_recipe()) {
        let a = instantiate(&recipe).unwrap();
        let b = instantiate(&recipe).unwrap();
        prop_assert_eq!(&a.matrix, &b.matrix);
        prop_assert_eq!(&a.map, &b.map);
        let ra = check_refined_kantorovich(&a.matrix, &a.map, &recipe.bounds, tol()).unwrap();
        let rb = check_refined_kantorovich(&b.matrix, &b.map, &recipe.bounds, tol()).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&ra).unwrap(),
            serde_json::to_string(&rb).unwrap()
        );
    }

    #[test]
    fn chain_reports_round_trip_through_json(recipe in arb_recipe()) {
        let inst = instantiate(&recipe).unwrap();
        let report =
            check_refined_kantorovich(&inst.matrix, &inst.map, &recipe.bounds, tol()).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: ChainReport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, report);
    }
}

/// Deterministic rng for auxiliary draws inside properties.
fn rand_stream(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(gen::mix_seed(seed, 97))
}

/// The stress catalogue (two-point, near-edge, condition 1e4, near-degenerate
/// band) must clear every chain that its brackets support, not just build.
#[test]
fn edge_catalogue_clears_the_chains() {
    for (m, upper) in [(1.0, 2.0), (0.2, 5.0)] {
        let base = SpectrumBounds::new(m, upper).unwrap();
        for dim in [2usize, 5] {
            for edge in gen::edge_instances(&base, dim).unwrap() {
                let refined =
                    check_refined_kantorovich(&edge.matrix, &edge.map, &edge.bounds, tol())
                        .unwrap();
                assert!(refined.all_hold, "{}: {refined:?}", edge.label);
                let chord_sum =
                    check_chord_sum(&edge.matrix, &edge.map, &edge.bounds, tol()).unwrap();
                assert!(chord_sum.all_hold, "{}: {chord_sum:?}", edge.label);
            }
        }
    }
}

/// Near-degenerate bands force every constant to 1, so the refined chain's
/// gaps collapse with the band width.
#[test]
fn near_degenerate_band_has_vanishing_gaps() {
    let base = SpectrumBounds::new(1.0, 2.0).unwrap();
    let edges = gen::edge_instances(&base, 3).unwrap();
    let degenerate = edges
        .iter()
        .find(|e| e.label.contains("near-degenerate"))
        .expect("catalogue includes the near-degenerate band");
    let report =
        check_refined_kantorovich(&degenerate.matrix, &degenerate.map, &degenerate.bounds, tol())
            .unwrap();
    assert!(report.all_hold);
    for link in &report.links {
        assert!(
            link.gap.abs() <= 1e-5,
            "near-degenerate gap should be tiny, got {}",
            link.gap
        );
    }
}
