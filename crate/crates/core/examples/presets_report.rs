//! Lists the built-in presets and prints per-node queue counts for a tree.

use switchsim::bench::{queue_count_report, Preset};

fn main() -> switchsim::Result<()> {
    for p in Preset::builtin() {
        println!("{:<14} {}", p.to_string(), p.describe());
    }

    let built = Preset::Tree {
        d: 3,
        diameter: 6,
        routes: None,
    }
    .build(0.9)?;
    let r = queue_count_report(&built.net);
    println!("\nleaves {}, routes {}", r.leaves, r.routes);
    let b = &r.busiest;
    println!(
        "busiest node {}: per-route {}, per-destination {}, proportional {}",
        b.node, b.per_route_bp, b.per_destination_bp, b.proportional
    );
    Ok(())
}
