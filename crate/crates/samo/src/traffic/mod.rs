//! Traffic-light scheduling instances, a deterministic queue-based
//! microsimulator, and the scalar objective built on top of it.
//!
//! A problem instance is a set of signalized intersections plus a link
//! network that vehicles traverse along fixed routes. The decision vector
//! assigns a duration (in ticks) to every phase of every intersection;
//! the objective rewards plans that move many vehicles to their
//! destination quickly while keeping a high green-to-red duration ratio.

mod generate;
mod io;
mod sim;

pub use generate::generate_instance;
pub use io::{
    load_instance, load_solution, save_instance, save_solution, FormatError,
    INSTANCE_FORMAT_VERSION, SOLUTION_FORMAT_VERSION,
};
pub use sim::simulate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default per-phase duration bounds in ticks when an instance does not
/// override them: a typical signal-engineering range.
pub const DEFAULT_DURATION_BOUNDS: (i64, i64) = (5, 60);

/// Queue capacity the generator assigns to every link.
pub const DEFAULT_LINK_CAPACITY: u32 = 4;

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("solution has {got} durations but instance dimensionality is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duration {value} at index {index} outside bounds [{min}, {max}]")]
    DurationOutOfBounds {
        index: usize,
        value: i64,
        min: i64,
        max: i64,
    },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

/// One signal phase: how many signal heads show green/red while it is
/// active, and which movements it permits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSpec {
    pub green_count: u32,
    pub red_count: u32,
    /// Bit `m` set ⇔ movement `m` at the owning intersection may proceed.
    pub movement_mask: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionSpec {
    pub phases: Vec<PhaseSpec>,
}

/// Signal controlling a link: the (intersection, movement) pair that must
/// be green for vehicles to leave the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkControl {
    pub intersection: usize,
    pub movement: u32,
}

/// A road segment holding a FIFO queue of at most `capacity` vehicles.
/// `control: None` means the link is ungoverned (vehicles always may leave).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub control: Option<LinkControl>,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VehicleRoute {
    /// Link ids traversed in order; nonempty.
    pub route: Vec<usize>,
    pub departure_tick: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficInstance {
    pub name: String,
    /// Simulation horizon in ticks.
    pub simulation_time: u32,
    /// Inclusive (min, max) bounds for every phase duration.
    pub duration_bounds: (i64, i64),
    pub links: Vec<LinkSpec>,
    pub intersections: Vec<IntersectionSpec>,
    pub vehicles: Vec<VehicleRoute>,
}

impl TrafficInstance {
    /// Problem dimensionality D: total phase count across intersections.
    pub fn dimensionality(&self) -> usize {
        self.intersections.iter().map(|i| i.phases.len()).sum()
    }

    /// Checks the structural invariants every instance must satisfy.
    pub fn validate(&self) -> Result<(), TrafficError> {
        let fail = |msg: String| Err(TrafficError::InvalidInstance(msg));
        if self.intersections.is_empty() {
            return fail("no intersections".into());
        }
        if self.simulation_time == 0 {
            return fail("simulation_time must be positive".into());
        }
        let (min, max) = self.duration_bounds;
        if min < 1 || min > max {
            return fail(format!("bad duration bounds [{min}, {max}]"));
        }
        for (i, inter) in self.intersections.iter().enumerate() {
            if inter.phases.is_empty() {
                return fail(format!("intersection {i} has no phases"));
            }
            for (j, phase) in inter.phases.iter().enumerate() {
                if phase.green_count + phase.red_count == 0 {
                    return fail(format!("phase ({i},{j}) has zero signal heads"));
                }
                if phase.green_count != phase.movement_mask.count_ones() {
                    return fail(format!(
                        "phase ({i},{j}): green_count {} != movement mask popcount {}",
                        phase.green_count,
                        phase.movement_mask.count_ones()
                    ));
                }
            }
        }
        for (l, link) in self.links.iter().enumerate() {
            if link.capacity == 0 {
                return fail(format!("link {l} has zero capacity"));
            }
            if let Some(ctl) = link.control {
                if ctl.intersection >= self.intersections.len() {
                    return fail(format!("link {l} controlled by unknown intersection"));
                }
                if ctl.movement >= 64 {
                    return fail(format!("link {l} movement index exceeds mask width"));
                }
            }
        }
        for (v, veh) in self.vehicles.iter().enumerate() {
            if veh.route.is_empty() {
                return fail(format!("vehicle {v} has an empty route"));
            }
            if let Some(&bad) = veh.route.iter().find(|&&l| l >= self.links.len()) {
                return fail(format!("vehicle {v} references unknown link {bad}"));
            }
        }
        Ok(())
    }
}

/// A traffic-light plan: one duration per phase, flattened in
/// intersection-major, phase-minor order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Solution {
    durations: Vec<i64>,
}

impl Solution {
    pub fn new(durations: Vec<i64>) -> Self {
        Self { durations }
    }

    pub fn durations(&self) -> &[i64] {
        &self.durations
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    /// Verifies length D and that every entry lies inside the instance's
    /// duration bounds.
    pub fn validate_for(&self, instance: &TrafficInstance) -> Result<(), TrafficError> {
        let expected = instance.dimensionality();
        if self.durations.len() != expected {
            return Err(TrafficError::DimensionMismatch {
                expected,
                got: self.durations.len(),
            });
        }
        let (min, max) = instance.duration_bounds;
        for (index, &value) in self.durations.iter().enumerate() {
            if value < min || value > max {
                return Err(TrafficError::DurationOutOfBounds {
                    index,
                    value,
                    min,
                    max,
                });
            }
        }
        Ok(())
    }

    /// Uniform random plan within the instance's bounds.
    pub fn random<R: rand::Rng>(rng: &mut R, instance: &TrafficInstance) -> Self {
        let (min, max) = instance.duration_bounds;
        let durations = (0..instance.dimensionality())
            .map(|_| rng.gen_range(min..=max))
            .collect();
        Self { durations }
    }
}

/// Aggregate counters reported by one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    /// Ticks spent in the network by vehicles that reached their
    /// destination, summed (waiting ticks included).
    pub total_travel_time: u64,
    /// Vehicle-ticks spent stationary (queued, at red, or blocked).
    pub total_waiting_time: u64,
    /// Vehicles that completed their route within the horizon.
    pub arrived: u32,
    /// Vehicles that did not.
    pub not_arrived: u32,
}

/// Green-to-red duration ratio of a plan:
/// `P = Σ_{i,j} d_{i,j} · g_{i,j} / max(r_{i,j}, 1)`.
///
/// A red count of zero is clamped to one so the term stays finite while
/// remaining monotone in the duration.
pub fn phase_ratio(instance: &TrafficInstance, s: &Solution) -> Result<f64, TrafficError> {
    s.validate_for(instance)?;
    let mut p = 0.0;
    let mut k = 0;
    for inter in &instance.intersections {
        for phase in &inter.phases {
            let g = f64::from(phase.green_count);
            let r = f64::from(phase.red_count.max(1));
            p += s.durations[k] as f64 * g / r;
            k += 1;
        }
    }
    Ok(p)
}

/// Scalar objective (smaller is better):
/// `F = (TT_v + TT_EP + NV_ND · T_S) / (NV_D² + P)`.
pub fn objective(instance: &TrafficInstance, s: &Solution) -> Result<f64, TrafficError> {
    let outcome = simulate(instance, s)?;
    let p = phase_ratio(instance, s)?;
    Ok(objective_from_outcome(
        &outcome,
        p,
        instance.simulation_time,
    ))
}

/// Composes the objective from an already-computed outcome and phase ratio.
pub fn objective_from_outcome(outcome: &SimulationOutcome, p: f64, t_s: u32) -> f64 {
    let numerator = outcome.total_travel_time as f64
        + outcome.total_waiting_time as f64
        + f64::from(outcome.not_arrived) * f64::from(t_s);
    let denominator = f64::from(outcome.arrived).powi(2) + p;
    if denominator == 0.0 {
        // Unreachable while bounds keep durations >= 1 (then P > 0), but
        // the contract still needs a total answer.
        return f64::INFINITY;
    }
    numerator / denominator
}
