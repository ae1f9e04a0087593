use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norm::{pauli_commutator_frobenius, pauli_commutator_norm};
use super::{build_hamiltonian, DenseOperator, Pauli, Spectrum};
use crate::chains::ExplicitGraphModel;
use crate::error::{Error, Result};
use crate::model::validate;
use crate::solver::solve_speed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Pauli placed on the first site and on each probe site.
    pub observable: Pauli,
    /// Arrival threshold on `‖[O_P(t), O_Q]‖`; both operators have norm 1.
    pub epsilon: f64,
    pub t_max: f64,
    /// Number of intervals in `[0, t_max]`.
    pub steps: usize,
    /// Stop once every probe has arrived.
    pub stop_when_arrived: bool,
    /// Keep measuring a probe after its arrival. Without this each trace
    /// ends at its arrival, which saves most of the norm evaluations.
    pub full_traces: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            observable: Pauli::Z,
            epsilon: 0.01,
            t_max: 10.0,
            steps: 100,
            stop_when_arrived: false,
            full_traces: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorTrace {
    pub site: usize,
    pub distance: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub epsilon: f64,
    /// First grid time with norm above `epsilon`.
    pub arrival_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LightConeScan {
    pub traces: Vec<CommutatorTrace>,
    /// Least-squares slope of distance against arrival time; absent with
    /// fewer than two distinct arrival times.
    pub empirical_velocity: Option<f64>,
    pub v_lr: f64,
    pub lambda_star: f64,
    pub ratio: Option<f64>,
}

/// Slope of the least-squares line `d = a + v t`.
pub fn fit_velocity(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let md = points.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = points.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if points.len() < 2 || stt == 0.0 {
        return None;
    }
    let std: f64 = points.iter().map(|p| (p.0 - mt) * (p.1 - md)).sum();
    Some(std / stt)
}

/// Watches `[O_0(t), O_q]` for every other site `q` and fits the arrival
/// front. The bound on the speed comes from the model's interior transition
/// table with the same couplings.
pub fn light_cone_scan(
    model: &ExplicitGraphModel,
    couplings: &[f64],
    cfg: &ScanConfig,
) -> Result<LightConeScan> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
        return Err(Error::NegativeValue {
            field: "epsilon".into(),
            value: cfg.epsilon,
        });
    }
    if !(cfg.t_max > 0.0 && cfg.t_max.is_finite()) || cfg.steps == 0 {
        return Err(Error::NegativeValue {
            field: "tmax".into(),
            value: cfg.t_max,
        });
    }
    let sites = model.sites();
    let origin = model.site_cell(0);
    let probes: Vec<(usize, f64)> = (1..sites)
        .map(|q| (q, model.distance(origin, model.site_cell(q))))
        .collect();
    let mut distinct: Vec<f64> = probes.iter().map(|p| p.1).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::TooSmall {
            what: "light-cone scan (distinct distances)",
            min: 4,
            got: distinct.len(),
        });
    }

    let speed = solve_speed(&validate(&model.to_model_spec(couplings)?)?)?;
    let h = build_hamiltonian(model, couplings)?;
    let spectrum = Spectrum::new(&h)?;
    let o_p = DenseOperator::pauli(sites, 0, cfg.observable)?;
    let evolver = spectrum.evolver(&o_p)?;

    let mut traces: Vec<CommutatorTrace> = probes
        .iter()
        .map(|&(site, distance)| CommutatorTrace {
            site,
            distance,
            times: Vec::new(),
            norms: Vec::new(),
            epsilon: cfg.epsilon,
            arrival_time: None,
        })
        .collect();

    for step in 0..=cfg.steps {
        let t = cfg.t_max * step as f64 / cfg.steps as f64;
        let active: Vec<usize> = (0..traces.len())
            .filter(|&i| cfg.full_traces || traces[i].arrival_time.is_none())
            .collect();
        if active.is_empty()
            || (cfg.stop_when_arrived && traces.iter().all(|tr| tr.arrival_time.is_some()))
        {
            break;
        }
        let a = evolver.at(t)?;
        let norms = active
            .par_iter()
            .map(|&i| {
                let site = traces[i].site;
                // the Frobenius bound settles most early, quiet probes
                if !cfg.full_traces
                    && pauli_commutator_frobenius(&a, site, cfg.observable) <= cfg.epsilon
                {
                    return Ok(None);
                }
                pauli_commutator_norm(&a, site, cfg.observable).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        for (&i, norm) in active.iter().zip(norms) {
            let tr = &mut traces[i];
            if let Some(norm) = norm {
                tr.times.push(t);
                tr.norms.push(norm);
                if norm > cfg.epsilon && tr.arrival_time.is_none() {
                    tr.arrival_time = Some(t);
                }
            }
        }
    }

    let arrivals: Vec<(f64, f64)> = traces
        .iter()
        .filter_map(|tr| tr.arrival_time.map(|t| (t, tr.distance)))
        .collect();
    let empirical_velocity = fit_velocity(&arrivals);
    Ok(LightConeScan {
        traces,
        empirical_velocity,
        v_lr: speed.v_lr,
        lambda_star: speed.lambda_star,
        ratio: empirical_velocity.map(|v| v / speed.v_lr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::build_ising_chain;
    use crate::model::validate;
    use crate::solver::bound_envelope;

    #[test]
    fn fit_examples() {
        assert_eq!(
            fit_velocity(&[(1.0, 1.0), (2.0, 3.0), (3.0, 5.0)]),
            Some(2.0)
        );
        assert_eq!(fit_velocity(&[(1.0, 1.0)]), None);
        assert_eq!(fit_velocity(&[(1.0, 1.0), (1.0, 2.0)]), None);
    }

    fn small_scan(g: f64, cfg: &ScanConfig) -> LightConeScan {
        light_cone_scan(&build_ising_chain(6).unwrap(), &[g, 1.0], cfg).unwrap()
    }

    #[test]
    fn traces_start_at_zero_and_stay_below_two() {
        let cfg = ScanConfig {
            t_max: 4.0,
            steps: 40,
            ..ScanConfig::default()
        };
        let scan = small_scan(1.0, &cfg);
        assert_eq!(scan.traces.len(), 5);
        for tr in &scan.traces {
            assert_eq!(tr.norms[0], 0.0);
            assert!(tr.norms.iter().all(|&n| n <= 2.0 + 1e-9));
        }
        let v = scan.empirical_velocity.unwrap();
        assert!(v > 0.0 && v < scan.v_lr);
        assert!((scan.v_lr - 2.0 * std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn norms_are_even_in_time() {
        let forward = ScanConfig {
            t_max: 2.0,
            steps: 8,
            ..ScanConfig::default()
        };
        let backward = ScanConfig {
            t_max: -2.0,
            ..forward.clone()
        };
        let a = small_scan(0.7, &forward);
        assert!(light_cone_scan(&build_ising_chain(6).unwrap(), &[0.7, 1.0], &backward).is_err());
        // evaluate negative times through the evolver directly
        let model = build_ising_chain(6).unwrap();
        let h = build_hamiltonian(&model, &[0.7, 1.0]).unwrap();
        let spectrum = Spectrum::new(&h).unwrap();
        let ev = spectrum
            .evolver(&DenseOperator::pauli(6, 0, Pauli::Z).unwrap())
            .unwrap();
        for (k, &t) in a.traces[1].times.iter().enumerate() {
            let minus = pauli_commutator_norm(&ev.at(-t).unwrap(), 2, Pauli::Z).unwrap();
            assert!((minus - a.traces[1].norms[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn fast_mode_finds_the_same_arrivals() {
        let full = ScanConfig {
            t_max: 5.0,
            steps: 50,
            ..ScanConfig::default()
        };
        let fast = ScanConfig {
            stop_when_arrived: true,
            full_traces: false,
            ..full.clone()
        };
        let a = small_scan(2.0, &full);
        let b = small_scan(2.0, &fast);
        for (x, y) in a.traces.iter().zip(&b.traces) {
            assert_eq!(x.arrival_time, y.arrival_time);
        }
        assert_eq!(a.empirical_velocity, b.empirical_velocity);
    }

    #[test]
    fn norms_stay_under_a_nonvacuous_envelope() {
        let model = build_ising_chain(6).unwrap();
        for g in [0.5, 1.0, 2.0] {
            let spec = validate(&model.to_model_spec(&[g, 1.0]).unwrap()).unwrap();
            let scan = small_scan(
                g,
                &ScanConfig {
                    t_max: 3.0,
                    steps: 30,
                    ..ScanConfig::default()
                },
            );
            for tr in &scan.traces {
                for (&t, &norm) in tr.times.iter().zip(&tr.norms) {
                    let env = bound_envelope(&spec, scan.lambda_star, t, tr.distance).unwrap();
                    if env <= 2.0 {
                        assert!(
                            norm <= env,
                            "g = {g}, d = {}, t = {t}: {norm} > {env}",
                            tr.distance
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn short_chains_are_rejected() {
        let r = light_cone_scan(
            &build_ising_chain(4).unwrap(),
            &[1.0, 1.0],
            &ScanConfig::default(),
        );
        assert!(matches!(r, Err(Error::TooSmall { min: 4, got: 3, .. })));
        let bad = ScanConfig {
            epsilon: 1.5,
            ..ScanConfig::default()
        };
        assert!(light_cone_scan(&build_ising_chain(6).unwrap(), &[1.0, 1.0], &bad).is_err());
    }
}
