//! Dressed boundary sinks: effective loss rate and dressed hoppings.

use super::SinkSpec;

/// Effective sink decay rate Gamma_1 = Omega_d^2 / Gamma'.
pub fn sink_rate(sink: &SinkSpec) -> f64 {
    sink.dressing_rabi * sink.dressing_rabi / sink.decay_rate
}

/// Dressing factor Omega_p / (2 Delta_p) multiplying every dipolar matrix
/// element with one dressed (sink) endpoint.
pub fn dressing_factor(sink: &SinkSpec) -> f64 {
    sink.probe_rabi / (2.0 * sink.probe_detuning)
}

/// Dressed hoppings J'_m = J'_1 / [1 + (m-1) a / a']^3 for m = 1..=count,
/// with J'_1 = C3 Omega_p / (18 Delta_p a'^3).
pub fn dressed_hoppings(sink: &SinkSpec, c3: f64, lattice_constant: f64, count: usize) -> Vec<f64> {
    let j1p = c3 * sink.probe_rabi / (18.0 * sink.probe_detuning * sink.offset.powi(3));
    (1..=count)
        .map(|m| j1p / (1.0 + (m - 1) as f64 * lattice_constant / sink.offset).powi(3))
        .collect()
}

/// Probe ratio Omega_p / Delta_p achieving a target J'_1 / J_1 at a given
/// sink offset: J'_1/J_1 = (Omega_p / 2 Delta_p) (a/a')^3.
pub fn solve_probe_ratio(offset_over_a: f64, target_j_ratio: f64) -> f64 {
    2.0 * offset_over_a.powi(3) * target_j_ratio
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sink(offset: f64, probe_rabi: f64, probe_detuning: f64) -> SinkSpec {
        SinkSpec {
            offset,
            dressing_rabi: 0.1,
            decay_rate: 1.0,
            probe_rabi,
            probe_detuning,
            local_shift: 0.0,
            count_left: 1,
            count_right: 1,
        }
    }

    #[test]
    fn rate_from_adiabatic_elimination() {
        // Omega_d = Gamma'/10 gives Gamma_1 = Gamma'/100.
        let s = SinkSpec {
            dressing_rabi: 0.1,
            decay_rate: 1.0,
            ..sink(0.5, 0.1, 1.0)
        };
        assert!((sink_rate(&s) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn hopping_tail_ratio() {
        // a' = a/2: J'_2 / J'_1 = [1 + a/a']^{-3} = 1/27.
        let s = sink(0.5, 0.2, 1.0);
        let js = dressed_hoppings(&s, 1.0, 1.0, 2);
        assert!((js[1] / js[0] - 1.0 / 27.0).abs() < 1e-14);
    }

    #[test]
    fn probe_ratio_inversion_plugs_back() {
        // a' = a/2, target J'_1 = J_1: Omega_p/Delta_p = 2 (a'/a)^3 = 1/4;
        // plugging back into the dressed hopping must reproduce J_1 exactly.
        let a = 1.0;
        let c3 = 9.0; // => J_1 = 1
        let ratio = solve_probe_ratio(0.5, 1.0);
        assert!((ratio - 0.25).abs() < 1e-15);
        let s = sink(0.5, ratio, 1.0);
        let j1p = dressed_hoppings(&s, c3, a, 1)[0];
        let j1 = c3 / (9.0 * a.powi(3));
        assert!((j1p / j1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn validity_warnings_fire() {
        let mut s = sink(0.5, 0.2, 1.0);
        s.dressing_rabi = 0.5;
        let warnings = s.validity_warnings(1.0);
        assert!(warnings.iter().any(|w| w.contains("Omega_d")));
        assert!(sink(0.5, 0.01, 1.0).validity_warnings(0.01).is_empty());
    }
}
