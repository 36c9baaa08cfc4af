//! Raw energy counters: RAPL powercap domains when this machine exposes
//! readable ones, otherwise the watts × wall-time proxy.

use std::time::Instant;

use samo::profile::{EnergyMeter, RaplReader};

fn main() {
    let meter = match RaplReader::discover() {
        Ok(reader) => {
            println!("RAPL counters readable (dram domain: {})", reader.has_dram());
            EnergyMeter::rapl(reader)
        }
        Err(err) => {
            println!("RAPL unavailable ({err}); using the proxy backend");
            EnergyMeter::proxy(50.0, 5.0)
        }
    };

    let before = meter.snapshot().unwrap();
    let started = Instant::now();
    let mut acc = 0u64;
    for i in 0..200_000_000u64 {
        acc = acc.wrapping_add(i).rotate_left(7);
    }
    std::hint::black_box(acc);
    let wall = started.elapsed().as_secs_f64();
    let after = meter.snapshot().unwrap();

    let reading = meter.delta(&before, &after, wall);
    println!("scope wall time: {wall:.3} s");
    println!("cpu energy:      {:.3} J ({:?})", reading.cpu_joules, reading.source);
    match reading.dram_joules {
        Some(j) => println!("dram energy:     {j:.3} J"),
        None => println!("dram energy:     not exposed on this machine"),
    }
}
