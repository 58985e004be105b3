use multicorn::atlas::{attracting_cycle, period1_boundary};
use multicorn::dynamics::{MapParams, SolveConfig};
use multicorn::rays::{parameter_ray, RayConfig};
use multicorn::angles::angle;
use multicorn::render::{
    classify_parameter, colorize, decode_png, decode_ppm, encode_png, encode_ppm, overlay, render_dynamical_plane,
    render_parameter_plane, Coloring, OverlayLayers, RenderConfig, RgbImage, Viewport,
};
use multicorn::Complex64;
use proptest::prelude::*;
use sha2::{Digest, Sha256};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn period_config() -> RenderConfig {
    RenderConfig {
        coloring: Coloring::Period,
        ..RenderConfig::default()
    }
}

#[test]
fn classification_examples() {
    let cfg = period_config();
    let zero = classify_parameter(2, c(0.0, 0.0), &cfg);
    assert!(zero.interior());
    assert_eq!(zero.period, Some(1));
    assert_eq!(zero.smooth_potential, 0.0);
    assert_eq!(classify_parameter(2, c(-1.0, 0.0), &cfg).period, Some(2));
    let two = classify_parameter(2, c(2.0, 0.0), &cfg);
    assert!(two.escape_iterations.unwrap() < 10);
    // Green's function of the critical point, by direct iteration: G(0) = G(c) / d.
    let (mut x, mut n) = (2.0f64, 1);
    while x < 1e100 {
        x = x * x + 2.0;
        n += 1;
    }
    let oracle = x.ln() / 2f64.powi(n);
    assert!((two.smooth_potential - oracle).abs() < 1e-12, "{} vs {oracle}", two.smooth_potential);
    assert!(classify_parameter(2, c(-1.7548776662466927, 0.0), &cfg).period == Some(3));
}

#[test]
fn julia_set_of_zero_parameter_is_the_unit_disc() {
    let vp = Viewport::new(c(0.0, 0.0), 3.0, 96, 96).unwrap();
    let params = MapParams::new(2, c(0.0, 0.0)).unwrap();
    let grid = render_dynamical_plane(&params, &vp, &RenderConfig::default()).unwrap();
    let margin = vp.pixel_size();
    for j in 0..96 {
        for i in 0..96 {
            let r = vp.pixel_to_point(i, j, 2).norm();
            if (r - 1.0).abs() > margin {
                assert_eq!(grid.get(i, j).interior(), r < 1.0, "pixel ({i}, {j}) at radius {r}");
            }
        }
    }
}

#[test]
fn parameter_plane_is_mirror_symmetric() {
    let vp = Viewport::new(c(-0.4, 0.0), 3.2, 80, 60).unwrap();
    let grid = render_parameter_plane(2, &vp, &period_config()).unwrap();
    for j in 0..60 {
        for i in 0..80 {
            assert_eq!(grid.get(i, j), grid.get(i, 59 - j), "({i}, {j})");
        }
    }
}

#[test]
fn rotated_viewport_gives_the_same_image() {
    let cfg = period_config();
    let base = Viewport::new(c(-0.5, 0.3), 1.5, 48, 40).unwrap();
    let grid = render_parameter_plane(2, &base, &cfg).unwrap();
    for k in 1..3 {
        let vp = Viewport { rotation: k, ..base };
        assert_eq!(render_parameter_plane(2, &vp, &cfg).unwrap().pixels, grid.pixels);
    }
}

#[test]
fn rendering_is_independent_of_tiling_and_threads() {
    let vp = Viewport::new(c(-0.3, 0.1), 2.5, 70, 50).unwrap();
    let cfg = period_config();
    let reference = render_parameter_plane(2, &vp, &cfg).unwrap();
    for (tile, threads) in [(7, 1), (64, 3), (1000, 2)] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let cfg = RenderConfig { tile_size: tile, ..cfg };
        let grid = pool.install(|| render_parameter_plane(2, &vp, &cfg)).unwrap();
        assert_eq!(grid.pixels, reference.pixels, "tile {tile}, {threads} threads");
    }
}

#[test]
fn probes_agree_with_cycle_analysis() {
    let cfg = period_config();
    let solve = SolveConfig::default();
    let mut checked = 0;
    for j in 0..24 {
        for i in 0..24 {
            let k = c(-1.9 + 2.3 * i as f64 / 23.0, -1.1 + 2.2 * j as f64 / 23.0);
            let rec = classify_parameter(2, k, &cfg);
            match rec.period {
                Some(p) if p <= 6 => {
                    assert!(attracting_cycle(2, k, p as usize, &solve).is_some(), "c = {k}, period {p}");
                    checked += 1;
                }
                _ => {}
            }
            if rec.escape_iterations.is_some() {
                for p in 1..=4 {
                    assert!(attracting_cycle(2, k, p, &solve).is_none(), "c = {k} escapes");
                }
            }
        }
    }
    assert!(checked > 30, "{checked}");
}

#[test]
fn potential_decreases_along_a_parameter_ray() {
    let cfg = RenderConfig {
        max_iterations: 100_000,
        ..RenderConfig::default()
    };
    let ray = parameter_ray(2, &angle(1, 7), &RayConfig::default()).unwrap();
    let mut last = f64::INFINITY;
    for (z, g) in ray.points.iter().zip(&ray.potentials).step_by(6) {
        // Pixels record G at the critical point, which is G(c) / d.
        let rec = classify_parameter(2, *z, &cfg);
        assert!(rec.smooth_potential < last);
        assert!((2.0 * rec.smooth_potential - g).abs() < 1e-6 * g, "{} vs {g}", rec.smooth_potential);
        last = rec.smooth_potential;
    }
}

#[test]
fn empty_overlay_is_the_identity() {
    let vp = Viewport::new(c(0.0, 0.0), 3.0, 32, 24).unwrap();
    let img = colorize(&render_parameter_plane(2, &vp, &RenderConfig::default()).unwrap());
    let layers = OverlayLayers::default();
    assert!(layers.is_empty());
    assert_eq!(overlay(&img, &vp, 2, &layers), img);
}

#[test]
fn deltoid_overlay_is_pinned() {
    let vp = Viewport::new(c(-0.2, 0.0), 2.4, 64, 64).unwrap();
    let base = colorize(&render_parameter_plane(2, &vp, &period_config()).unwrap());
    let deltoid: Vec<Complex64> = (0..=240)
        .map(|j| period1_boundary(2, std::f64::consts::TAU * j as f64 / 240.0))
        .collect();
    let layers = OverlayLayers {
        curves: vec![deltoid],
        points: vec![c(0.25, 0.0)],
        ..OverlayLayers::default()
    };
    let img = overlay(&base, &vp, 2, &layers);
    assert_ne!(img, base);
    let hash: String = Sha256::digest(encode_ppm(&img)).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hash, "5cf0813aa58fd1194144630797725425581f773d542915d9518ab196d830bddf");
}

fn arb_image() -> impl Strategy<Value = RgbImage> {
    (1usize..20, 1usize..20).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), w * h * 3).prop_map(move |data| RgbImage { width: w, height: h, data })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn image_codecs_round_trip(img in arb_image()) {
        prop_assert_eq!(&decode_ppm(&encode_ppm(&img)).unwrap(), &img);
        prop_assert_eq!(&decode_png(&encode_png(&img).unwrap()).unwrap(), &img);
    }
}

#[test]
fn malformed_images_are_rejected() {
    assert!(decode_ppm(b"P3\n1 1\n255\n").is_err());
    assert!(decode_ppm(b"P6\n2 2\n255\nabc").is_err());
    assert!(decode_png(b"not a png").is_err());
}
