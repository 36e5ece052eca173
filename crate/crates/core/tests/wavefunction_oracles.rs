use bornrate::wavefunction::BornDistribution;
use bornrate::WavefunctionSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ∫_{-10}^{x} cos²(5t) sinc²(t) dt / ∫_{-10}^{10}, evaluated with mpmath at 30
// digits over 400 panels.
const DOUBLE_SLIT_CDF: [(f64, f64); 4] = [
    (1.0, 0.784_152_218_152_013_5),
    (0.3, 0.602_980_805_998_312_2),
    (2.5, 0.962_274_258_181_939_1),
    (-3.7, 0.031_932_329_638_053_51),
];
const DOUBLE_SLIT_NORM: f64 = 0.658_511_869_245_822_5;
const SINGLE_SLIT_CDF_1: f64 = 0.795_440_699_894_061_96;

fn analytic_specs() -> Vec<WavefunctionSpec> {
    vec![
        WavefunctionSpec::gaussian(1.0, 10.0),
        WavefunctionSpec::single_slit(1.0, 10.0),
        WavefunctionSpec::double_slit(1.0, 5.0, 10.0),
    ]
}

fn double_slit_intensity(x: f64) -> f64 {
    let s = if x == 0.0 { 1.0 } else { x.sin() / x };
    (5.0 * x).cos().powi(2) * s * s
}

/// Composite trapezoid over `nodes` equal intervals.
fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> f64 {
    let h = (b - a) / nodes as f64;
    let inner: f64 = (1..nodes).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * f(a) + inner + 0.5 * f(b))
}

#[test]
fn double_slit_normalization_against_trapezoid() {
    let d = BornDistribution::<f64>::new(&WavefunctionSpec::double_slit(1.0, 5.0, 10.0)).unwrap();
    let z = trapezoid(double_slit_intensity, -10.0, 10.0, 2_000_000);
    assert!((d.norm() * z - 1.0).abs() < 1e-9, "{}", d.norm() * z);
    assert!((d.norm() - DOUBLE_SLIT_NORM).abs() < 1e-9);
    let pdf_mass = trapezoid(|x| d.pdf(x), -10.0, 10.0, 2_000_000);
    assert!((pdf_mass - 1.0).abs() < 1e-9);
}

#[test]
fn double_slit_cdf_against_oracles() {
    let d = BornDistribution::<f64>::new(&WavefunctionSpec::double_slit(1.0, 5.0, 10.0)).unwrap();
    let z = trapezoid(double_slit_intensity, -10.0, 10.0, 2_000_000);
    for (x, want) in DOUBLE_SLIT_CDF {
        assert!((d.cdf(x) - want).abs() < 1e-7, "x={x}: {} vs {want}", d.cdf(x));
        let nodes = (((x + 10.0) / 20.0) * 2_000_000.0) as usize;
        let trap = trapezoid(double_slit_intensity, -10.0, x, nodes) / z;
        assert!((d.cdf(x) - trap).abs() < 1e-7, "x={x}: trapezoid {trap}");
    }
    let s = BornDistribution::<f64>::new(&WavefunctionSpec::single_slit(1.0, 10.0)).unwrap();
    assert!((s.cdf(1.0) - SINGLE_SLIT_CDF_1).abs() < 1e-8);
}

#[test]
fn gaussian_cdf_matches_erf() {
    let d = BornDistribution::<f64>::new(&WavefunctionSpec::gaussian(1.0, 8.0)).unwrap();
    for k in -60..=60 {
        let x = k as f64 * 0.1;
        let phi = 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2);
        assert!((d.cdf(x) - phi).abs() < 1e-9, "x={x}");
    }
    // standard normal table value Φ⁻¹(0.8413) ≈ 0.99982
    assert!((d.quantile(0.8413).unwrap() - 1.0).abs() < 1e-3);
    assert!((d.quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-8);
}

#[test]
fn normalization_and_symmetry() {
    for spec in analytic_specs() {
        let d = BornDistribution::<f64>::new(&spec).unwrap();
        let l = spec.support_halfwidth();
        assert!((d.cdf(l) - 1.0).abs() <= 1e-9);
        assert!((d.cdf(0.0) - 0.5).abs() <= 1e-9, "{spec:?}: {}", d.cdf(0.0));
        for k in 0..=1000 {
            let x = k as f64 * l / 1000.0;
            let s = d.cdf(-x) + d.cdf(x) - 1.0;
            assert!(s.abs() <= 1e-8, "{spec:?} x={x}: {s}");
        }
    }
}

#[test]
fn interpolation_matches_direct_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in analytic_specs() {
        let d = BornDistribution::<f64>::new(&spec).unwrap();
        let l = spec.support_halfwidth();
        for _ in 0..200 {
            let x = rng.gen_range(-l..l);
            let err = (d.cdf(x) - d.cdf_by_quadrature(x)).abs();
            assert!(err <= 1e-8, "{spec:?} x={x}: {err}");
        }
    }
}

#[test]
fn monotone_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for spec in analytic_specs() {
        let d = BornDistribution::<f64>::new(&spec).unwrap();
        let l = spec.support_halfwidth();
        for _ in 0..100_000 {
            let a = rng.gen_range(-l - 1.0..l + 1.0);
            let b = rng.gen_range(-l - 1.0..l + 1.0);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            assert!(d.cdf(lo) <= d.cdf(hi));
        }
    }
}

#[test]
fn derivative_of_cdf_is_pdf() {
    let h = 1e-4;
    for spec in analytic_specs() {
        let d = BornDistribution::<f64>::new(&spec).unwrap();
        let l = spec.support_halfwidth();
        for k in 1..400 {
            let x = -l + 2.0 * l * k as f64 / 400.0 + 0.0013;
            let p = d.pdf(x);
            // near density zeros the relative error is ill-conditioned
            if p < 1e-3 {
                continue;
            }
            // Richardson-extrapolated central differences: the plain h²·pdf''/6
            // truncation alone reaches 1e-5·pdf on the fringes
            let central = |h: f64| (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
            let fd = (4.0 * central(h / 2.0) - central(h)) / 3.0;
            assert!((fd - p).abs() / p <= 1e-5, "{spec:?} x={x}: {fd} vs {p}");
        }
    }
}

#[test]
fn central_peak() {
    for spec in analytic_specs() {
        let d = BornDistribution::<f64>::new(&spec).unwrap();
        let l = spec.support_halfwidth();
        let peak = d.pdf(0.0);
        for k in 0..=10_000 {
            let x = -l + 2.0 * l * k as f64 / 10_000.0;
            assert!(d.pdf(x) <= peak, "{spec:?} x={x}");
        }
    }
}

#[test]
fn quantile_round_trip() {
    for spec in analytic_specs().into_iter().chain([WavefunctionSpec::tabulated(
        vec![(-3.0, 0.0), (-1.0, 2.0), (0.5, 0.0), (1.0, 0.0), (2.0, 1.0), (3.0, 0.0)],
        4.0,
    )]) {
        let d = BornDistribution::<f64>::new(&spec).unwrap();
        for k in 0..=2000 {
            let p = k as f64 / 2000.0;
            let x = d.quantile(p).unwrap();
            assert!((d.cdf(x) - p).abs() <= 1e-10, "{spec:?} p={p}");
        }
        if spec.is_symmetric() {
            assert!(d.quantile(0.5).unwrap().abs() <= 1e-8);
        }
    }
}

#[test]
fn tabulated_cdf_is_exact_piecewise_quadratic() {
    // triangle on [-1, 1]: F(x) = (x + 1)² / 2 for x ≤ 0
    let d = BornDistribution::<f64>::new(&WavefunctionSpec::tabulated(
        vec![(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)],
        2.0,
    ))
    .unwrap();
    for k in 0..=100 {
        let x = -1.0 + k as f64 / 100.0;
        assert!((d.cdf(x) - 0.5 * (x + 1.0).powi(2)).abs() < 1e-12);
    }
    assert_eq!(d.cdf(-1.5), 0.0);
    assert_eq!(d.cdf(1.5), 1.0);
}

#[test]
fn high_frequency_double_slit() {
    let d = BornDistribution::<f64>::new(&WavefunctionSpec::double_slit(0.5, 40.0, 30.0)).unwrap();
    assert!((d.cdf(0.0) - 0.5).abs() < 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let x = rng.gen_range(-30.0..30.0);
        assert!((d.cdf(x) - d.cdf_by_quadrature(x)).abs() <= 1e-8);
    }
}
