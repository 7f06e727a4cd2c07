mod common;

use std::sync::OnceLock;

use proptest::prelude::*;

use grushin_core::diagnostics::Certification;
use grushin_core::integrator::{BlowupCause, Status};
use grushin_core::runner::{
    compute_blowup_constants, decide_verdict, parse_config, run_experiment, run_experiment_with, run_sweep,
    validate, Mode, RawConfig, RunOptions, RunStatus, SimulationSummary, SweepAxis, TheoremReport, Verdict,
    BLOWUP_TIME_SLACK, SWEEP_CSV_HEADER,
};

use common::{config_path, rel_err};

fn raw(name: &str) -> RawConfig {
    parse_config(&config_path(name)).unwrap().raw
}

/// The shipped blow-up config on a coarse grid with a short horizon.
fn small_blowup() -> RawConfig {
    let mut r = raw("blowup_cubic.json");
    r.cells = vec![16, 16];
    r.sim.t_end = 0.02;
    r
}

/// A blow-up report whose hypotheses hold, without a simulation.
fn base_report() -> &'static TheoremReport {
    static BASE: OnceLock<TheoremReport> = OnceLock::new();
    BASE.get_or_init(|| {
        let cfg = validate(small_blowup()).unwrap();
        let opts = RunOptions {
            skip_simulation: true,
            ..RunOptions::default()
        };
        let r = run_experiment_with(&cfg, &opts).report;
        assert!(r.hypotheses_hold(), "{}", r.verdict_reason);
        assert!(r.tstar_bound.is_some());
        r
    })
}

fn certification(certified: bool) -> Certification {
    Certification {
        check: "calF nondecreasing".into(),
        margin: if certified { 0.0 } else { -1.0 },
        normalized_margin: if certified { 0.0 } else { -1.0 },
        tolerance: 1e-6,
        certified,
        records_used: 10,
        records_excluded: 3,
    }
}

prop_compose! {
    fn synthetic_report()(
        margin in -1.0f64..1.0,
        constraint_mask in prop::collection::vec(any::<bool>(), 4),
        f0 in -10.0f64..10.0,
        positive_f in any::<bool>(),
        recheck_holds in any::<bool>(),
        certified in any::<bool>(),
        blew_up in any::<bool>(),
        time_fraction in 0.01f64..3.0,
    ) -> TheoremReport {
        let mut r = base_report().clone();
        let h = r.hypothesis.as_mut().unwrap();
        h.worst_margin = margin;
        h.holds = margin >= -1e-12 * (1.0 + h.scale.abs());
        for (c, &keep) in r.constraint_check.iter_mut().zip(&constraint_mask) {
            c.holds = keep;
        }
        r.f0 = Some(f0);
        r.positivity.as_mut().unwrap().holds = positive_f;
        let mut recheck = r.hypothesis.clone().unwrap();
        recheck.holds = recheck_holds;
        r.hypothesis_recheck = Some(recheck);
        r.certification = vec![certification(certified)];
        let t = time_fraction * r.tstar_bound.unwrap();
        r.simulation = Some(SimulationSummary {
            outcome: if blew_up {
                Status::Blowup { t_blow: t, cause: BlowupCause::Threshold }
            } else {
                Status::Completed
            },
            t_final: t,
            steps: 100,
            rejected: 0,
            records: 101,
            max_supnorm: 1.0,
            t_blow: blew_up.then_some(t),
            final_energy_ratio: None,
        });
        r
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn constant_scales_with_energy_over_potential(
        alpha in 2.01f64..50.0,
        f0 in 1e-3f64..1e3,
        i0 in 1e-3f64..1e3,
        a in 0.01f64..100.0,
        b in 0.01f64..100.0,
    ) {
        let base = compute_blowup_constants(alpha, f0, i0).unwrap();
        let scaled = compute_blowup_constants(alpha, a * f0, b * i0).unwrap();
        prop_assert!(rel_err(scaled.m, base.m * b * b / a) <= 1e-14);
        prop_assert_eq!(scaled.sigma, base.sigma);
    }

    #[test]
    fn consistent_verdict_requires_everything(r in synthetic_report()) {
        let (verdict, _) = decide_verdict(&r);
        if verdict == Some(Verdict::ConsistentWithTheorem) {
            let h = r.hypothesis.as_ref().unwrap();
            prop_assert!(h.worst_margin >= -1e-12 * (1.0 + h.scale.abs()));
            prop_assert!(r.constraint_check.iter().all(|c| c.holds));
            prop_assert!(r.f0.unwrap() > 0.0);
            prop_assert!(r.positivity.as_ref().unwrap().holds);
            prop_assert!(r.hypothesis_recheck.as_ref().unwrap().holds);
            prop_assert!(r.certification.iter().all(|c| c.certified));
            let sim = r.simulation.as_ref().unwrap();
            let within = matches!(sim.outcome, Status::Blowup { t_blow, .. }
                if t_blow <= BLOWUP_TIME_SLACK * r.tstar_bound.unwrap());
            prop_assert!(within);
        }
        if !r.hypotheses_hold() {
            prop_assert_eq!(verdict, Some(Verdict::HypothesesNotMet));
        }
    }
}

#[test]
fn late_blowup_is_flagged() {
    let mut r = base_report().clone();
    let t = 2.0 * r.tstar_bound.unwrap();
    r.simulation = Some(SimulationSummary {
        outcome: Status::Blowup {
            t_blow: t,
            cause: BlowupCause::StepExhaustion,
        },
        t_final: t,
        steps: 1,
        rejected: 0,
        records: 2,
        max_supnorm: 1e9,
        t_blow: Some(t),
        final_energy_ratio: None,
    });
    assert_eq!(decide_verdict(&r).0, Some(Verdict::InconsistencyFlag));
}

#[test]
fn reports_never_contain_null_or_nan() {
    let dir = tempfile::tempdir().unwrap();
    let u0 = dir.path().join("u0.txt");
    std::fs::write(&u0, "-1\n".repeat(15 * 15)).unwrap();
    let mut failing = small_blowup();
    failing.initial = serde_json::from_value(serde_json::json!({"file": {"path": u0}})).unwrap();
    let mut free = raw("free_decay.json");
    free.sim.t_end = 0.01;
    let reports = [
        run_experiment(&validate(small_blowup()).unwrap()),
        run_experiment(&validate(failing).unwrap()),
        run_experiment(&validate(free).unwrap()),
    ];
    assert_eq!(reports[1].status, RunStatus::Failed);
    assert_eq!(reports[1].failed_stage.as_deref(), Some("initial"));
    assert_eq!(reports[1].verdict, Some(Verdict::Inconclusive));
    assert_eq!(reports[2].verdict, None);
    for r in &reports {
        let json = r.to_json();
        assert!(!json.contains("null"), "{json}");
        assert!(!json.contains("NaN"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["sigma", "M", "Tstar_bound", "verdict", "F0", "lambda1"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
    let free_json: serde_json::Value = serde_json::from_str(&reports[2].to_json()).unwrap();
    assert_eq!(free_json["verdict"], "not-applicable");
    assert_eq!(free_json["M"], "not-applicable");
}

#[test]
fn free_mode_warns_when_f_is_not_positive() {
    let mut r = raw("free_decay.json");
    r.nonlinearity = serde_json::from_str(r#"{"expr": "-u"}"#).unwrap();
    r.sim.t_end = 0.01;
    let report = run_experiment(&validate(r).unwrap());
    assert_eq!(report.status, RunStatus::Ok);
    assert!(!report.positivity.as_ref().unwrap().holds);
    assert!(report.warnings.iter().any(|w| w.contains("f(u) > 0")), "{:?}", report.warnings);
}

#[test]
fn amplitude_sweep_crosses_potential_sign() {
    let dir = tempfile::tempdir().unwrap();
    let values = [1.0, 2.0, 5.0, 8.0];
    let summary = run_sweep(&small_blowup(), SweepAxis::Amplitude, &values, Some(dir.path()));
    let got: Vec<f64> = summary.rows.iter().map(|r| r.value).collect();
    assert_eq!(got, values);
    let f0: Vec<f64> = summary.rows.iter().map(|r| r.f0.unwrap()).collect();
    assert!(f0[0] < 0.0 && f0[3] > 0.0, "{f0:?}");
    assert_eq!(summary.rows[0].verdict, Some(Verdict::HypothesesNotMet));
    let csv = summary.to_csv();
    assert!(csv.starts_with(SWEEP_CSV_HEADER));
    assert_eq!(csv.lines().count(), values.len() + 1);
    for i in 0..values.len() {
        assert!(dir.path().join(format!("run_{i:03}")).join("report.json").exists());
    }
}

#[test]
fn gamma_sweep_keeps_positive_spectrum() {
    let mut template = small_blowup();
    template.mode = Mode::Free;
    template.sim.t_end = 1e-3;
    let values = [0.0, 0.5, 1.0, 2.0, -1.0];
    let summary = run_sweep(&template, SweepAxis::Gamma, &values, None);
    for row in &summary.rows[..4] {
        assert!(row.lambda1.unwrap() > 0.0);
        assert_eq!(row.status, "ok");
    }
    assert!(summary.rows[4].status.contains("/space/gamma"), "{}", summary.rows[4].status);
}
