//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Runs as a plain binary under `cargo test`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{oracle, projections};
use hanle_core::angular_momentum::{clebsch_gordan, wigner_3j, wigner_6j, AngularMomentum, Projection};
use hanle_core::atomic_system::{preset, FieldConfig, Polarization};
use hanle_core::observables::{contrast, linspace, scan_lineshape, SolverMode};
use hanle_core::scenario::{figure_preset, run_scenario};
use hanle_core::validation::{self, CriterionReport};

const RANDOM_SCENARIOS: usize = 200;
const RANDOM_SEED: u64 = 0x5eed_2024;
const ORACLE_TOL: f64 = 1e-12;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);

fn j(t: i32) -> AngularMomentum {
    AngularMomentum::from_twice(t as u32)
}

fn m(t: i32) -> Projection {
    Projection::from_twice(t)
}

/// Every 3j, Clebsch-Gordan and 6j argument set with all `j <= 5`.
fn oracle_equivalence() -> CriterionReport {
    let start = Instant::now();
    let (mut worst, mut count) = (0.0_f64, 0_u64);
    let js = 0..=10;
    for a in js.clone() {
        for b in js.clone() {
            for c in js.clone() {
                for ma in projections(a) {
                    for mb in projections(b) {
                        for mc in projections(c) {
                            let w = wigner_3j(j(a), j(b), j(c), m(ma), m(mb), m(mc)).expect("valid projections");
                            let cg = clebsch_gordan(j(a), m(ma), j(b), m(mb), j(c), m(mc)).expect("valid projections");
                            worst = worst
                                .max((w - oracle::three_j(a, b, c, ma, mb, mc)).abs())
                                .max((cg - oracle::cg(a, ma, b, mb, c, mc)).abs());
                            count += 2;
                        }
                    }
                }
                for d in js.clone() {
                    for e in js.clone() {
                        for f in js.clone() {
                            let w = wigner_6j(j(a), j(b), j(c), j(d), j(e), j(f));
                            worst = worst.max((w - oracle::six_j(a, b, c, d, e, f)).abs());
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    CriterionReport {
        id: "9",
        title: "angular-momentum oracle equivalence",
        passed: worst <= ORACLE_TOL && elapsed < ORACLE_BUDGET,
        detail: format!("{count} symbols, max |diff| {worst:.2e} (<= {ORACLE_TOL:e}), {:.1} s (< 60 s)", elapsed.as_secs_f64()),
    }
}

/// Smallest probed saturation at which the zero-field point is a local minimum.
fn reversal_onset() -> String {
    let Ok(system) = preset("rb87_2_3") else { return "unavailable".into() };
    let grid = linspace(-0.1, 0.1, 5).expect("valid grid");
    let probes = [5.0, 10.0, 15.0, 17.0, 20.0, 30.0, 50.0];
    let onset = probes.iter().find(|&&s| {
        FieldConfig::with_saturation(Polarization::LinearX, s, 0.0)
            .and_then(|f| scan_lineshape(&system, &f, &grid, SolverMode::Steady))
            .map(|scan| [0, 1, 3, 4].iter().all(|&k| scan.pi_e[k] > scan.pi_e[2]))
            .unwrap_or(false)
    });
    match onset {
        Some(s) => format!("rb87_2_3 zero-field minimum first seen at s = {s} among {probes:?}"),
        None => format!("rb87_2_3 zero-field minimum not seen for s in {probes:?}"),
    }
}

/// The fig4 scenario repeated on the closed counterpart and with a longer integration.
fn open_contrast_context() -> String {
    let run = |text: &str| -> Option<f64> {
        let cfg = hanle_core::scenario::parse_config(text).ok()?;
        contrast(&run_scenario(&cfg).ok()?).ok()
    };
    let base = figure_preset("fig4").map(|c| hanle_core::scenario::to_config_text(&c)).unwrap_or_default();
    let closed = run(&base.replace("rb87_1_2_open", "model_1_2_closed"));
    let long = run(&base.replace("mode.t_int_gamma = 100", "mode.t_int_gamma = 1000"));
    let long_closed = run(&base.replace("rb87_1_2_open", "model_1_2_closed").replace("mode.t_int_gamma = 100", "mode.t_int_gamma = 1000"));
    let show = |c: Option<f64>| c.map_or("n/a".to_string(), |c| format!("{c:.4}"));
    format!(
        "integrated contrast, closed counterpart at t_int = 100: {}; t_int = 1000: open {}, closed {}",
        show(closed),
        show(long),
        show(long_closed)
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let criteria: Vec<fn() -> CriterionReport> = vec![
        validation::coherence_anchor,
        validation::contrast_anchor,
        validation::width_anchor,
        validation::basis_change,
        validation::saturation_limit,
        validation::polarization_selectivity,
        validation::lineshape_reversal,
        validation::open_transition_bookkeeping,
        validation::open_transition_contrast,
        oracle_equivalence,
        || validation::randomized_properties(RANDOM_SCENARIOS, RANDOM_SEED),
        validation::two_level_reduction,
    ];
    let mut failed = 0;
    for run in criteria {
        let report = run();
        println!("{report}");
        failed += usize::from(!report.passed);
    }
    println!("[INFO]   7 {}", reversal_onset());
    println!("[INFO]  8b {}", open_contrast_context());
    println!(
        "acceptance: {} failed, {:.1} s",
        failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
