//! Perturbation-theory validity diagnostics.

use super::modes::rwa_ratio;
use super::IonChainSpec;
use nalgebra::DMatrix;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

/// One inequality with its margin (left-hand side over right-hand side).
#[derive(Debug, Clone)]
pub struct ValidityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub checks: Vec<ValidityCheck>,
}

impl ValidityReport {
    pub fn overall(&self) -> CheckStatus {
        let mut status = CheckStatus::Pass;
        for c in &self.checks {
            match c.status {
                CheckStatus::Fail => return CheckStatus::Fail,
                CheckStatus::Warn => status = CheckStatus::Warn,
                CheckStatus::Pass => {}
            }
        }
        status
    }

    pub fn failed(&self) -> Vec<&ValidityCheck> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .collect()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<44} {:>11.4e} vs {:>11.4e}  ratio {:>9.3e}  {:?}",
                c.name, c.lhs, c.rhs, c.ratio, c.status
            )?;
        }
        Ok(())
    }
}

/// Strong "<<" condition: pass below 0.2, warn below 0.5.
fn strong(name: &str, lhs: f64, rhs: f64) -> ValidityCheck {
    let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
    let status = if ratio < 0.2 {
        CheckStatus::Pass
    } else if ratio < 0.5 {
        CheckStatus::Warn
    } else {
        CheckStatus::Fail
    };
    ValidityCheck {
        name: name.into(),
        lhs,
        rhs,
        ratio,
        status,
    }
}

/// Same-order ">~" condition: pass for lhs/rhs <= 1.25, warn <= 3.
fn same_order(name: &str, lhs: f64, rhs: f64) -> ValidityCheck {
    let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
    let status = if ratio <= 1.25 {
        CheckStatus::Pass
    } else if ratio <= 3.0 {
        CheckStatus::Warn
    } else {
        CheckStatus::Fail
    };
    ValidityCheck {
        name: name.into(),
        lhs,
        rhs,
        ratio,
        status,
    }
}

/// Evaluate every inequality of the sideband construction with its margin.
pub fn validity_check(spec: &IonChainSpec, hoppings: Option<&DMatrix<f64>>) -> ValidityReport {
    let [d1, d2, _, _] = spec.detunings;
    let dmin = d1.min(d2);
    let sqrt_n = (spec.n_bath as f64).sqrt();
    let mut checks = Vec::new();

    checks.push(strong(
        "eta1 |Omega1| / (2 sqrt(N_B)) << min(delta1, delta2)",
        spec.lasers[1].eta * spec.lasers[1].rabi.abs() / (2.0 * sqrt_n),
        dmin,
    ));
    checks.push(strong(
        "eta2 |Omega2'| / (2 sqrt(N_B)) << min(delta1, delta2)",
        spec.lasers[2].eta * spec.lasers[2].rabi.abs() / (2.0 * sqrt_n),
        dmin,
    ));
    checks.push(strong(
        "eta3 |Omega3'| / (2 sqrt(N_B)) << min(delta1, delta2)",
        spec.lasers[3].eta * spec.lasers[3].rabi.abs() / (2.0 * sqrt_n),
        dmin,
    ));
    checks.push(strong(
        "|Delta_S| << min(delta1, delta2)",
        spec.detuning_sys.abs(),
        dmin,
    ));
    checks.push(strong(
        "max(delta1, delta2) << omega_x",
        d1.max(d2),
        spec.omega_x,
    ));
    for (p, laser) in spec.lasers.iter().enumerate() {
        if laser.rabi != 0.0 || p <= 3 {
            let status = if laser.eta < 0.3 {
                CheckStatus::Pass
            } else if laser.eta < 0.5 {
                CheckStatus::Warn
            } else {
                CheckStatus::Fail
            };
            checks.push(ValidityCheck {
                name: format!("Lamb-Dicke eta_{p} < 0.3"),
                lhs: laser.eta,
                rhs: 0.3,
                ratio: laser.eta / 0.3,
                status,
            });
        }
    }
    // Trap anisotropy.
    let aniso = spec.omega_z / spec.omega_x;
    checks.push(ValidityCheck {
        name: "anisotropy omega_z / omega_x < 0.2".into(),
        lhs: spec.omega_z,
        rhs: 0.2 * spec.omega_x,
        ratio: aniso / 0.2,
        status: if aniso < 0.2 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
    });
    if let Some(j) = hoppings {
        let max_j = j.amax();
        checks.push(strong(
            "max|J_lj| << omega_x (rotating-wave guard)",
            max_j,
            spec.omega_x,
        ));
        checks.push(same_order(
            "max|J_lj| <~ min(delta1, delta2)",
            max_j,
            dmin,
        ));
    }
    ValidityReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ionchain::tests_support::paper_point_spec;

    #[test]
    fn working_point_passes() {
        let spec = paper_point_spec();
        let positions = spec.positions().unwrap();
        let (j, _) = crate::ionchain::radial_hoppings(
            &positions,
            spec.omega_x,
            spec.mass,
            spec.charge,
            spec.omega_x,
        )
        .unwrap();
        let report = validity_check(&spec, Some(&j));
        assert_eq!(report.overall(), CheckStatus::Pass, "\n{report}");
    }

    #[test]
    fn zero_detuning_fails_with_named_inequality() {
        let mut spec = paper_point_spec();
        spec.detunings[0] = 0.0;
        let report = validity_check(&spec, None);
        assert_eq!(report.overall(), CheckStatus::Fail);
        let failed = report.failed();
        assert!(failed
            .iter()
            .any(|c| c.name.contains("delta1") || c.name.contains("min(delta1, delta2)")));
    }

    #[test]
    fn large_lamb_dicke_warns() {
        let mut spec = paper_point_spec();
        spec.lasers[2].eta = 0.45;
        let report = validity_check(&spec, None);
        let check = report
            .checks
            .iter()
            .find(|c| c.name.contains("eta_2"))
            .unwrap();
        assert_eq!(check.status, CheckStatus::Warn);
        spec.lasers[2].eta = 0.5;
        let report = validity_check(&spec, None);
        assert_eq!(report.overall(), CheckStatus::Fail);
    }
}
