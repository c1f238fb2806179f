//! Built-in worked example: four classifiers on a two-class frame, checked
//! step by step against known intermediate values.

use std::fmt::Write as _;

use dsfusion_core::metrics::{bjs_divergence, boe_centers, evidence_distance};
use dsfusion_core::{fuse, FocalSet, Frame, MassFunction, PipelineConfig};

use crate::error::Result;

/// `(m({E1}), m({E2}), m(Θ))` of the four classifiers.
pub const EVIDENCES: [[f64; 3]; 4] = [
    [0.5, 0.1, 0.4],
    [0.3, 0.3, 0.4],
    [0.5, 0.0, 0.5],
    [0.4, 0.2, 0.4],
];

/// Absolute tolerance on intermediate and final values.
pub const TOLERANCE: f64 = 0.005;
/// Absolute tolerance on the unnormalized support degrees.
pub const SUPPORT_TOLERANCE: f64 = 0.15;
/// 1-based class the fused evidence must select.
pub const EXPECTED_CLASS: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub step: u8,
    pub quantity: &'static str,
    pub expected: Vec<f64>,
    pub actual: Vec<f64>,
    pub tolerance: f64,
}

impl Check {
    pub fn max_error(&self) -> f64 {
        if self.expected.len() != self.actual.len() {
            return f64::INFINITY;
        }
        self.expected
            .iter()
            .zip(&self.actual)
            .map(|(e, a)| (e - a).abs())
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_error() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    /// 1-based.
    pub predicted_class: usize,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed) && self.predicted_class == EXPECTED_CLASS
    }

    /// The first check in step order that is out of tolerance.
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed())
    }

    pub fn check(&self, quantity: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.quantity == quantity)
    }

    pub fn render(&self) -> String {
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<4} {:<16} {:<34} {:<34} {:>6} {:>8}  status",
            "step", "quantity", "expected", "actual", "tol", "error"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<4} {:<16} {:<34} {:<34} {:>6} {:>8.5}  {}",
                c.step,
                c.quantity,
                fmt(&c.expected),
                fmt(&c.actual),
                c.tolerance,
                c.max_error(),
                if c.passed() { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "8    class            {:<34} {:<34} {:>6} {:>8}  {}",
            EXPECTED_CLASS,
            self.predicted_class,
            0,
            "",
            if self.predicted_class == EXPECTED_CLASS { "ok" } else { "FAIL" }
        );
        out
    }
}

pub fn evidences() -> Result<Vec<MassFunction>> {
    let frame = Frame::indexed(2)?;
    Ok(EVIDENCES
        .iter()
        .map(|e| MassFunction::from_singletons(frame.clone(), &e[..2], e[2]))
        .collect::<Result<_, _>>()?)
}

/// Runs the fixture through the pipeline under `cfg`.
pub fn run(cfg: &PipelineConfig) -> Result<SelftestReport> {
    let ms = evidences()?;
    let fused = fuse(&ms, cfg)?;
    let d = fused
        .diagnostics
        .as_ref()
        .expect("several evidences always produce diagnostics");
    let basis = [FocalSet::singleton(0), FocalSet::singleton(1), ms[0].frame().full()];

    let bjs_first = ms
        .iter()
        .map(|m| bjs_divergence(&ms[0], m, cfg.bjs_log_base))
        .collect::<Result<Vec<_>, _>>()?;
    let centers = boe_centers(&ms)?;
    let dist_center = ms
        .iter()
        .map(|m| evidence_distance(m, &centers.global, cfg.distance_weighting))
        .collect::<Result<Vec<_>, _>>()?;
    let dist_without_first = ms[1..]
        .iter()
        .map(|m| evidence_distance(m, &centers.leave_one_out[0], cfg.distance_weighting))
        .collect::<Result<Vec<_>, _>>()?;

    let check = |step, quantity, expected: &[f64], actual: Vec<f64>, tolerance| Check {
        step,
        quantity,
        expected: expected.to_vec(),
        actual,
        tolerance,
    };
    let mut checks = vec![
        check(1, "bjs(m1, mi)", &[0.0, 0.056, 0.054, 0.0163], bjs_first, TOLERANCE),
        check(1, "aBJS", &[0.042, 0.080, 0.111, 0.046], d.average_bjs.clone(), TOLERANCE),
        check(2, "center", &[0.425, 0.150, 0.425], centers.global.to_vector(&basis), TOLERANCE),
        check(2, "d(mi, center)", &[0.094, 0.197, 0.184, 0.061], dist_center, TOLERANCE),
        check(2, "SW", &[0.134], vec![d.scatter], TOLERANCE),
        check(
            2,
            "center~1",
            &[0.400, 0.167, 0.433],
            centers.leave_one_out[0].to_vector(&basis),
            TOLERANCE,
        ),
        check(2, "d(mi, center~1)", &[0.170, 0.205, 0.047], dist_without_first, TOLERANCE),
        check(2, "SW~i", &[0.141, 0.099, 0.094, 0.154], d.scatter_without.clone(), TOLERANCE),
        check(2, "m*", &[0.496, 0.522, 0.525, 0.487], d.disagreement.clone(), TOLERANCE),
        check(3, "SD", &[47.95, 23.87, 17.09, 45.02], d.support.clone(), SUPPORT_TOLERANCE),
        check(4, "SD_norm", &[0.358, 0.178, 0.128, 0.336], d.support_norm.clone(), TOLERANCE),
        check(5, "E_d", &[0.601, 0.664, 0.540, 0.650], d.deng_entropy.clone(), TOLERANCE),
        check(5, "CD", &[0.653, 0.346, 0.219, 0.643], d.credibility.clone(), TOLERANCE),
        check(6, "CD_norm", &[0.351, 0.186, 0.118, 0.346], d.credibility_norm.clone(), TOLERANCE),
    ];
    let we_expected: [[f64; 3]; 4] = [
        [0.175, 0.035, 0.140],
        [0.056, 0.056, 0.074],
        [0.059, 0.000, 0.059],
        [0.136, 0.069, 0.136],
    ];
    const WE_NAMES: [&str; 4] = ["WE row 1", "WE row 2", "WE row 3", "WE row 4"];
    for (i, row) in we_expected.iter().enumerate() {
        let actual = basis
            .iter()
            .map(|set| d.basis.iter().position(|b| b == set).map_or(0.0, |p| d.weighted[i][p]))
            .collect();
        checks.push(check(7, WE_NAMES[i], row, actual, TOLERANCE));
    }
    checks.push(check(8, "fused", &[0.818, 0.1265, 0.056], fused.fused.to_vector(&basis), TOLERANCE));
    Ok(SelftestReport {
        checks,
        predicted_class: fused.predicted + 1,
    })
}
