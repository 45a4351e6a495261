//! Stage-by-stage timing of the quartic-route per-field pipeline, to steer
//! optimization. Run: cargo run --release -p monocubic --example profile_quartic

use std::time::Instant;

use monocubic::class_groups::quartic_side_values;
use monocubic::cubic::enumerate_by_height;
use monocubic::orders::{classify, DEFAULT_RHO_BUDGET};
use monocubic::qenum::class_orbit_counts;

fn main() {
    let x: u128 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50_000);
    let t0 = Instant::now();
    let classes = enumerate_by_height(x).unwrap();
    println!("enumerate: {} classes in {:?}", classes.len(), t0.elapsed());

    let t1 = Instant::now();
    let mut admitted = Vec::new();
    for cf in &classes {
        let cls = classify(&cf.form, DEFAULT_RHO_BUDGET).unwrap();
        if cls.irreducible && cls.galois_s3 && cls.maximal == Some(true) {
            admitted.push(cf.form);
        }
    }
    println!(
        "classify: {} admitted in {:?}",
        admitted.len(),
        t1.elapsed()
    );

    let t2 = Instant::now();
    let mut total_orbits = 0usize;
    for f in &admitted {
        let (i, j) = f.invariants().unwrap();
        if let Some(c) = class_orbit_counts(i, j, DEFAULT_RHO_BUDGET).unwrap() {
            total_orbits += c.weak_total;
        }
    }
    println!(
        "class_orbit_counts: {} orbits in {:?}",
        total_orbits,
        t2.elapsed()
    );

    let t3 = Instant::now();
    for f in admitted.iter().take(200) {
        let _ = quartic_side_values(f, DEFAULT_RHO_BUDGET).unwrap();
    }
    println!("quartic_side_values on 200 fields: {:?}", t3.elapsed());
}
