use hyperrobust::cascade::{static_attack_order, AttackSpec};
use hyperrobust::generators::{gen_er, CardinalityRange};
use hyperrobust::robustness::{adaptive_simpson, robustness_discrete, PercolationSampler, QuadratureConfig};

/// Trapezoid rule over 10,001 uniform points of the percolation curve.
fn trapezoid_reference(sampler: &mut PercolationSampler<'_>) -> f64 {
    let points = 10_001;
    let step = 1.0 / (points - 1) as f64;
    let values: Vec<f64> = (0..points).map(|i| sampler.at_fraction(i as f64 * step)).collect();
    step * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[points - 1]))
}

#[test]
fn tightening_epsilon_never_increases_error() {
    let loose = QuadratureConfig::with_epsilon(1e-3, 10).unwrap();
    let tight = QuadratureConfig::with_epsilon(1e-4, 10).unwrap();
    for seed in 0..20 {
        let n = 15 + (seed as usize % 16);
        let h = gen_er(n, 0.1, CardinalityRange::default(), seed).unwrap();
        let mut sampler = PercolationSampler::new(&h, AttackSpec::Static, static_attack_order(&h)).unwrap();
        let reference = trapezoid_reference(&mut sampler);
        let err = |cfg: &QuadratureConfig, s: &mut PercolationSampler<'_>| {
            (adaptive_simpson(|x| s.at_fraction(x), 0.0, 1.0, cfg).value - reference).abs()
        };
        let e_loose = err(&loose, &mut sampler);
        let e_tight = err(&tight, &mut sampler);
        assert!(
            e_tight <= e_loose + 1e-12,
            "seed {seed}, n {n}: tight {e_tight} > loose {e_loose}"
        );
        // The reference itself sits within half a step of the discrete mean.
        let discrete = robustness_discrete(&mut sampler);
        assert!((reference - discrete).abs() <= 1.0 / (2.0 * n as f64) + 1e-3);
    }
}
