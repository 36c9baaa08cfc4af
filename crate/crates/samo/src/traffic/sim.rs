//! Deterministic discrete-time queue simulation.
//!
//! Tick protocol (ticks `t = 0 .. simulation_time-1`):
//!
//! 1. **Spawn.** Every vehicle with `departure_tick <= t` that is still
//!    outside the network enters the back of its first link's queue if
//!    that queue is below capacity; otherwise it keeps waiting outside.
//!    Vehicles are considered in id order. Spawning does not count as a
//!    move, so a vehicle may spawn and advance in the same tick.
//! 2. **Advance.** Links are processed in id order. Only the head of each
//!    queue is a candidate, and a link releases at most one vehicle per
//!    tick. The head advances iff it has not already advanced this tick,
//!    its link is ungoverned or its controlling (intersection, movement)
//!    is green under the active phase, and — unless the link is the last
//!    of its route — the next link's queue is currently below capacity.
//!    Advancing past the last link completes the route: the vehicle
//!    leaves the network and contributes `t + 1 - departure_tick` ticks
//!    of travel time.
//! 3. **Wait accounting.** Every vehicle that has departed, has not
//!    finished, and did not advance this tick contributes one stationary
//!    vehicle-tick to the total waiting time.
//!
//! Each intersection cycles through its phases from tick 0 with the
//! durations given by the solution, so the active phase at tick `t` is
//! found from `t mod Σ_j d_{i,j}`.

use std::collections::VecDeque;

use super::{SimulationOutcome, Solution, TrafficError, TrafficInstance};

/// Per-intersection phase schedule: prefix sums of the plan's durations.
struct Schedule {
    cumulative: Vec<i64>,
    cycle: i64,
}

impl Schedule {
    fn build(instance: &TrafficInstance, s: &Solution) -> Vec<Schedule> {
        let mut schedules = Vec::with_capacity(instance.intersections.len());
        let mut k = 0;
        for inter in &instance.intersections {
            let mut cumulative = Vec::with_capacity(inter.phases.len());
            let mut acc = 0;
            for _ in &inter.phases {
                acc += s.durations()[k];
                cumulative.push(acc);
                k += 1;
            }
            schedules.push(Schedule {
                cycle: acc,
                cumulative,
            });
        }
        schedules
    }

    fn active_phase(&self, tick: u32) -> usize {
        let t = i64::from(tick) % self.cycle;
        self.cumulative.iter().position(|&c| t < c).unwrap()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum VehicleState {
    Outside,
    /// Index into the vehicle's route.
    OnLink(usize),
    Done,
}

/// Runs the microsimulation of `s` on `instance`.
///
/// Identical inputs always produce identical outcomes; there is no
/// randomness anywhere in the protocol.
pub fn simulate(
    instance: &TrafficInstance,
    s: &Solution,
) -> Result<SimulationOutcome, TrafficError> {
    instance.validate()?;
    s.validate_for(instance)?;

    let schedules = Schedule::build(instance, s);
    let green = |link: usize, tick: u32| -> bool {
        match instance.links[link].control {
            None => true,
            Some(ctl) => {
                let phase = schedules[ctl.intersection].active_phase(tick);
                let mask = instance.intersections[ctl.intersection].phases[phase].movement_mask;
                mask & (1 << ctl.movement) != 0
            }
        }
    };

    let n_vehicles = instance.vehicles.len();
    let mut state = vec![VehicleState::Outside; n_vehicles];
    let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); instance.links.len()];
    let mut moved = vec![false; n_vehicles];

    let mut total_travel_time = 0u64;
    let mut total_waiting_time = 0u64;
    let mut arrived = 0u32;

    for tick in 0..instance.simulation_time {
        for flag in moved.iter_mut() {
            *flag = false;
        }

        // Spawn.
        for (v, veh) in instance.vehicles.iter().enumerate() {
            if state[v] == VehicleState::Outside && veh.departure_tick <= tick {
                let first = veh.route[0];
                if (queues[first].len() as u32) < instance.links[first].capacity {
                    queues[first].push_back(v);
                    state[v] = VehicleState::OnLink(0);
                }
            }
        }

        // Advance: one departure per link per tick, head only.
        for link in 0..queues.len() {
            let Some(&head) = queues[link].front() else {
                continue;
            };
            if moved[head] || !green(link, tick) {
                continue;
            }
            let VehicleState::OnLink(pos) = state[head] else {
                unreachable!("queued vehicle must be on a link");
            };
            let route = &instance.vehicles[head].route;
            if pos + 1 == route.len() {
                // Past the last link: the vehicle arrives.
                queues[link].pop_front();
                state[head] = VehicleState::Done;
                moved[head] = true;
                arrived += 1;
                total_travel_time +=
                    u64::from(tick + 1 - instance.vehicles[head].departure_tick);
            } else {
                let next = route[pos + 1];
                if (queues[next].len() as u32) < instance.links[next].capacity {
                    queues[link].pop_front();
                    queues[next].push_back(head);
                    state[head] = VehicleState::OnLink(pos + 1);
                    moved[head] = true;
                }
            }
        }

        // Wait accounting.
        for (v, veh) in instance.vehicles.iter().enumerate() {
            let departed = veh.departure_tick <= tick;
            let finished = state[v] == VehicleState::Done;
            if departed && !finished && !moved[v] {
                total_waiting_time += 1;
            }
        }
    }

    Ok(SimulationOutcome {
        total_travel_time,
        total_waiting_time,
        arrived,
        not_arrived: (n_vehicles - arrived as usize) as u32,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{
        objective_from_outcome, phase_ratio, IntersectionSpec, LinkControl, LinkSpec, PhaseSpec,
        VehicleRoute,
    };
    use super::*;

    fn ungoverned_link(capacity: u32) -> LinkSpec {
        LinkSpec {
            control: None,
            capacity,
        }
    }

    fn governed_link(intersection: usize, movement: u32, capacity: u32) -> LinkSpec {
        LinkSpec {
            control: Some(LinkControl {
                intersection,
                movement,
            }),
            capacity,
        }
    }

    fn two_movement_intersection() -> IntersectionSpec {
        IntersectionSpec {
            phases: vec![
                PhaseSpec {
                    green_count: 1,
                    red_count: 1,
                    movement_mask: 0b01,
                },
                PhaseSpec {
                    green_count: 1,
                    red_count: 1,
                    movement_mask: 0b10,
                },
            ],
        }
    }

    #[test]
    fn single_vehicle_ungoverned_link() {
        let inst = TrafficInstance {
            name: "one-link".into(),
            simulation_time: 10,
            duration_bounds: (1, 10),
            links: vec![ungoverned_link(2)],
            intersections: vec![IntersectionSpec {
                phases: vec![PhaseSpec {
                    green_count: 1,
                    red_count: 0,
                    movement_mask: 0b1,
                }],
            }],
            vehicles: vec![VehicleRoute {
                route: vec![0],
                departure_tick: 0,
            }],
        };
        let out = simulate(&inst, &Solution::new(vec![5])).unwrap();
        assert_eq!(out.arrived, 1);
        assert_eq!(out.total_travel_time, 1);
        assert_eq!(out.total_waiting_time, 0);
    }

    #[test]
    fn vehicle_blocked_by_red_for_full_horizon() {
        // Phase 0 (the only phase) never permits movement 1.
        let inst = TrafficInstance {
            name: "blocked".into(),
            simulation_time: 15,
            duration_bounds: (1, 100),
            links: vec![governed_link(0, 1, 2)],
            intersections: vec![IntersectionSpec {
                phases: vec![PhaseSpec {
                    green_count: 1,
                    red_count: 1,
                    movement_mask: 0b01,
                }],
            }],
            vehicles: vec![VehicleRoute {
                route: vec![0],
                departure_tick: 0,
            }],
        };
        let out = simulate(&inst, &Solution::new(vec![7])).unwrap();
        assert_eq!(out.arrived, 0);
        assert_eq!(out.not_arrived, 1);
        assert_eq!(out.total_waiting_time, u64::from(inst.simulation_time));
        assert_eq!(out.total_travel_time, 0);
    }

    /// The frozen micro-instance: two intersections, three vehicles, a
    /// capacity-one bottleneck, and a horizon that strands one vehicle.
    ///
    /// Expected counters were derived by a tick-by-tick hand trace of the
    /// protocol in the module docs before this simulator was written:
    ///
    /// ```text
    /// I0 durations (2,2): ticks 0,1 -> phase A (mv0), 2,3 -> phase B (mv1)
    /// I1 durations (3,1): ticks 0..2 -> phase A (mv0), 3 -> phase B (mv1)
    /// L0 -> (I0,mv0) cap 2 | L1 -> (I1,mv0) cap 2 | L2 ungoverned cap 1
    /// L3 -> (I0,mv1) cap 2 | L4 -> (I1,mv1) cap 1 (unused by any route)
    /// V0: [L0,L1,L2] dep 0 | V1: [L0,L1,L2] dep 1 | V2: [L3,L1,L2] dep 0
    ///
    /// t=0: V0 L0->L1; V2 spawns L3, red -> waits          (EP 1)
    /// t=1: V1 L0->L1; V0 L1->L2; V2 red -> waits          (EP 2)
    /// t=2: V1 blocked (L2 full)                           (EP 3)
    ///      V0 exits L2: travel 3-0=3; V2 L3->L1 (green B)
    /// t=3: I1 phase B: V1 red, V2 queued                  (EP 5)
    /// t=4: V1 L1->L2; V2 now head but L1 already released (EP 6)
    /// t=5: V2 blocked (L2 full)                           (EP 7)
    ///      V1 exits L2: travel 6-1=5
    /// t=6: V2 L1->L2; horizon ends with V2 en route
    /// => TT_v = 3+5 = 8, TT_EP = 7, NV_D = 2, NV_ND = 1
    /// ```
    fn micro_instance() -> (TrafficInstance, Solution) {
        let inst = TrafficInstance {
            name: "micro".into(),
            simulation_time: 7,
            duration_bounds: (1, 10),
            links: vec![
                governed_link(0, 0, 2),
                governed_link(1, 0, 2),
                ungoverned_link(1),
                governed_link(0, 1, 2),
                governed_link(1, 1, 1),
            ],
            intersections: vec![two_movement_intersection(), two_movement_intersection()],
            vehicles: vec![
                VehicleRoute {
                    route: vec![0, 1, 2],
                    departure_tick: 0,
                },
                VehicleRoute {
                    route: vec![0, 1, 2],
                    departure_tick: 1,
                },
                VehicleRoute {
                    route: vec![3, 1, 2],
                    departure_tick: 0,
                },
            ],
        };
        (inst, Solution::new(vec![2, 2, 3, 1]))
    }

    #[test]
    fn micro_instance_matches_hand_trace() {
        let (inst, plan) = micro_instance();
        let out = simulate(&inst, &plan).unwrap();
        assert_eq!(out.total_travel_time, 8);
        assert_eq!(out.total_waiting_time, 7);
        assert_eq!(out.arrived, 2);
        assert_eq!(out.not_arrived, 1);
    }

    #[test]
    fn micro_instance_objective_composes_hand_trace() {
        // P = 2*1 + 2*1 + 3*1 + 1*1 = 8, F = (8 + 7 + 1*7) / (4 + 8).
        let (inst, plan) = micro_instance();
        let out = simulate(&inst, &plan).unwrap();
        let p = phase_ratio(&inst, &plan).unwrap();
        assert_eq!(p, 8.0);
        let f = objective_from_outcome(&out, p, inst.simulation_time);
        assert!((f - 22.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn simulation_is_deterministic() {
        let (inst, plan) = micro_instance();
        let a = simulate(&inst, &plan).unwrap();
        let b = simulate(&inst, &plan).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conservation_of_vehicles() {
        let (inst, plan) = micro_instance();
        let out = simulate(&inst, &plan).unwrap();
        assert_eq!(
            out.arrived as usize + out.not_arrived as usize,
            inst.vehicles.len()
        );
    }
}
