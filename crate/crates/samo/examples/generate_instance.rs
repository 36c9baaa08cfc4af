//! Generate a synthetic grid instance and write it to disk.
//!
//! ```text
//! cargo run --example generate_instance
//! ```

use samo::traffic::{generate_instance, save_instance};

fn main() {
    let instance = generate_instance(7, (2, 2), 24, 120);
    println!("name:            {}", instance.name);
    println!("intersections:   {}", instance.intersections.len());
    println!("dimensionality:  {}", instance.dimensionality());
    println!("links:           {}", instance.links.len());
    println!("vehicles:        {}", instance.vehicles.len());
    println!("horizon (ticks): {}", instance.simulation_time);
    println!(
        "duration bounds: [{}, {}]",
        instance.duration_bounds.0, instance.duration_bounds.1
    );

    let path = std::env::temp_dir().join("samo_instance.json");
    save_instance(&instance, &path).unwrap();
    println!("saved to {}", path.display());
}
