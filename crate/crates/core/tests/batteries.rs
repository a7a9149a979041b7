use bochner_core::verify::{run, PsiModeName, Suite, VerifyConfig};

fn small(seed: u64) -> VerifyConfig {
    VerifyConfig {
        seed,
        instances: Some(40),
        audit_samples: 2_000,
        ..VerifyConfig::default()
    }
}

fn assert_passes(suite: Suite, cfg: VerifyConfig) {
    let report = run(suite, cfg);
    let failed: Vec<String> = report
        .checks()
        .filter(|c| !c.pass)
        .map(|c| {
            format!(
                "{}: max_error {:e} > {:e} ({:?})",
                c.id, c.max_error, c.tolerance, c.note
            )
        })
        .collect();
    assert!(failed.is_empty(), "{suite} failures:\n{}", failed.join("\n"));
    assert!(report.pass);
}

#[test]
fn duality_small() {
    assert_passes(Suite::Duality, small(11));
}

#[test]
fn smoothness_small() {
    assert_passes(Suite::Smoothness, small(12));
}

#[test]
fn projections_small() {
    assert_passes(Suite::Projections, small(13));
}

#[test]
fn derivatives_small() {
    assert_passes(Suite::Derivatives, small(14));
}

#[test]
fn derivatives_numeric_psi() {
    assert_passes(
        Suite::Derivatives,
        VerifyConfig {
            psi: PsiModeName::Numeric,
            ..small(15)
        },
    );
}

#[test]
fn hilbert_small() {
    assert_passes(Suite::Hilbert, small(16));
}

#[test]
fn decisions_do_not_depend_on_threads() {
    let cfg = VerifyConfig {
        instances: Some(8),
        audit_samples: 1_000,
        ..small(17)
    };
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = serial.install(|| run(Suite::All, cfg));
    let b = run(Suite::All, cfg);
    assert_eq!(a.decisions(), b.decisions());
    assert_eq!(a, b);
}

#[test]
fn report_lists_every_battery() {
    let report = run(
        Suite::All,
        VerifyConfig {
            instances: Some(2),
            audit_samples: 1_000,
            ..VerifyConfig::default()
        },
    );
    let suites: Vec<Suite> = report.suites.iter().map(|s| s.suite).collect();
    assert_eq!(suites, Suite::BATTERIES.to_vec());
    assert_eq!(report.pass, report.checks().all(|c| c.pass));
}
