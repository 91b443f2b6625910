#![allow(clippy::excessive_precision, clippy::type_complexity)]

//! Comparisons against values computed independently of this crate.

use dd_isac::capacity::{capacity_curve, Normalization};
use dd_isac::channel::{effective_channel_with, ChannelOptions, Path, PathSet, TwistConvention, WssusStats};
use dd_isac::checks::frobenius_rel_error;
use dd_isac::covariance::{CovarianceModel, CovarianceOptions};
use dd_isac::pulse::{sample_pulse, PulseKind, PulseParams};
use dd_isac::sensing::{fim_discrete_with, DerivativeMethod};
use dd_isac::GridSpec;
use num_complex::Complex64;

// (gamma, alpha_c, beta_c) -> (I_tt, I_nn, I_tn) of the sampled TGP on the
// 256 x 256 grid, from a vectorised reference implementation
const FIM_256: &[((f64, f64, f64), (f64, f64, f64))] = &[
    ((1.0, 0.0, 0.0), (1128313729.9541233, 1.8053019679265972e-06, -3.6007066979799504e-05)),
    ((0.3, 12.0, -1.0), (4558364500.2342129, 1.4893336134465955e-07, 2.8271402656052778)),
    ((7.0, 40.0, 6.5), (4607524672.0287666, 6.6077802423410606e-05, 495.36091352556588)),
    ((0.01, 50.0, 10.0), (41456822424.101952, 7.0934815297304519e-07, 4.7123889803846906)),
];

#[test]
fn discrete_fim_matches_reference() {
    let g = GridSpec::sensing_default();
    for &((gm, a, b), (tt, nn, tn)) in FIM_256 {
        let pulse = sample_pulse(PulseKind::Tgp(PulseParams::new(gm, a, b).unwrap()), &g).unwrap();
        let f = fim_discrete_with(&pulse, 1.0, DerivativeMethod::Analytic).unwrap().fim;
        assert!((f.i_tt / tt - 1.0).abs() < 1e-10, "{gm},{a},{b}: {} vs {tt}", f.i_tt);
        assert!((f.i_nn / nn - 1.0).abs() < 1e-10, "{gm},{a},{b}: {} vs {nn}", f.i_nn);
        assert!((f.i_tn - tn).abs() < 1e-10 * (tt * nn).sqrt(), "{gm},{a},{b}: {} vs {tn}", f.i_tn);
    }
}

#[test]
fn fine_step_agrees_with_analytic_derivatives() {
    let g = GridSpec::new(64, 64, 1.12e-3, 28e3).unwrap();
    let pulse = sample_pulse(PulseKind::Tgp(PulseParams::new(0.8, 6.0, 1.5).unwrap()), &g).unwrap();
    let a = fim_discrete_with(&pulse, 1.0, DerivativeMethod::Analytic).unwrap().fim;
    let f = fim_discrete_with(&pulse, 1.0, DerivativeMethod::FineStep).unwrap();
    let defect = f.richardson_defect.unwrap();
    assert!(defect < 1e-3);
    for (x, y) in [(f.fim.i_tt, a.i_tt), (f.fim.i_nn, a.i_nn)] {
        assert!((x / y - 1.0).abs() <= 2.0 * defect + 1e-9, "{x} vs {y}");
    }
}

fn covariance_case(p: PulseParams, opts: CovarianceOptions, samples: usize, tol: f64) {
    let g = GridSpec::covariance_default();
    let model = CovarianceModel::new(g, p, WssusStats::covariance_default(&g), opts).unwrap();
    let r = model.matrix();
    let mc = model.monte_carlo(samples, 11).unwrap();
    let err = frobenius_rel_error(r.as_ref(), mc.as_ref());
    assert!(err < tol, "{p:?} {opts:?}: {err}");
}

#[test]
fn covariance_matches_monte_carlo_across_options() {
    let p = PulseParams::new(0.6, 12.0, -3.0).unwrap();
    covariance_case(p, CovarianceOptions::default(), 20_000, 0.03);
    covariance_case(p, CovarianceOptions { wrap: true, twist: TwistConvention::Receive }, 20_000, 0.03);
    covariance_case(
        PulseParams::SGP,
        CovarianceOptions { wrap: false, twist: TwistConvention::Transmit },
        20_000,
        0.03,
    );
}

#[test]
fn on_grid_single_path_is_a_shifted_pulse() {
    // a path on bin (2, -1) moves every symbol by exactly two delay bins and
    // one Doppler bin down, with the twist as a per-column phase
    let g = GridSpec::new(8, 8, 1.12e-3, 28e3).unwrap();
    let kind = PulseKind::Tgp(PulseParams::new(1.3, 4.0, 1.0).unwrap());
    let pulse = sample_pulse(kind, &g).unwrap();
    let path = Path { gain: Complex64::new(0.5, -0.2), tau: 2.0 * g.d_tau(), nu: -g.d_nu() };
    let h = effective_channel_with(&PathSet::new(vec![path]), &pulse, ChannelOptions::default()).unwrap();
    for q in 0..g.size() {
        let (m, n) = g.unflat(q);
        let twist = Complex64::from_polar(
            1.0,
            2.0 * std::f64::consts::PI * (n as f64 * path.nu / g.b - m as f64 * path.tau / g.t),
        );
        for p in 0..g.size() {
            let (k, l) = g.unflat(p);
            let dk = (k as i64 - m as i64 - 2).rem_euclid(8);
            let dl = (l as i64 - n as i64 + 1).rem_euclid(8);
            let (dk, dl) = (if dk >= 4 { dk - 8 } else { dk }, if dl >= 4 { dl - 8 } else { dl });
            let want = path.gain * pulse.at_index(dk, dl) * twist;
            assert!((h.entry(p, q) - want).norm() < 1e-14, "p={p} q={q}");
        }
    }
}

#[test]
fn identity_like_channel_capacity() {
    // one on-grid path with a delta-like pulse is unitary, so after
    // unit-average-gain scaling H H^H = I and capacity is MN log2(1 + snr/MN)
    let g = GridSpec::new(4, 4, 1.0, 64.0).unwrap();
    let pulse = sample_pulse(PulseKind::Sinc, &g).unwrap();
    let path = Path { gain: Complex64::new(0.0, 3.0), tau: g.d_tau(), nu: 0.0 };
    let mut h = effective_channel_with(&PathSet::new(vec![path]), &pulse, ChannelOptions::default()).unwrap();
    Normalization::UnitAverageGain.apply(&mut h);
    let c = capacity_curve(&h, &[1.0, 10.0]).unwrap();
    for (c, snr) in c.iter().zip([1.0, 10.0]) {
        assert!((c - 16.0 * (1.0 + snr / 16.0f64).log2()).abs() < 1e-12, "{c}");
    }
}
