use quantevo_core::forecaster::{Forecaster, ForecasterConfig};
use quantevo_core::market_data::{split, synthesize, SplitResult, SplitSpec, SynthSpec};

fn forty_days(signal_coef: f64) -> SplitResult {
    let series = synthesize(&SynthSpec {
        seed: 3,
        n_minutes: 40 * 1440,
        signal_coef,
        ..Default::default()
    })
    .unwrap();
    split(
        &series,
        &SplitSpec::by_fractions(&series, 0.5, 0.25).unwrap(),
    )
    .unwrap()
}

#[test]
fn pure_noise_has_no_skill() {
    let s = forty_days(0.0);
    let f = Forecaster::fit(&s.train, &ForecasterConfig::default()).unwrap();
    let m = f.score(&s.validation).unwrap();
    assert!(m.r2 < 0.001, "r2 {}", m.r2);
}

#[test]
fn momentum_signal_is_recovered() {
    let s = forty_days(2.5e-4);
    let f = Forecaster::fit(&s.train, &ForecasterConfig::default()).unwrap();
    let m = f.score(&s.validation).unwrap();
    assert!(m.r2 > 0.01, "r2 {}", m.r2);
    assert!(m.ic_mean > 0.0);
    let alpha = f.predict(&s.validation).unwrap();
    // Same order of magnitude as a liquid minute-bar market.
    assert!(
        (3.22e-6..3.22e-4).contains(&alpha.alpha_sd),
        "alpha_sd {}",
        alpha.alpha_sd
    );
}
