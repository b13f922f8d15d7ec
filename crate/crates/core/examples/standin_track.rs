//! Writes the synthetic stand-in track shipped in `data/standin_track.csv`:
//! 1,577 fixes of a simulated path, one every 20 steps, mapped to planar
//! metres (`time,x,y`, time in seconds).
//!
//! `cargo run --example standin_track -- crates/core/data/standin_track.csv`

use std::fmt::Write as _;

use homerange::simulator::{simulate, SimParams};

const FIXES: usize = 1577;
const STRIDE: usize = 20;
const METRES_PER_UNIT: f64 = 4000.0;
const EASTING: f64 = 512_000.0;
const NORTHING: f64 = 7_340_000.0;
const SECONDS_PER_FIX: f64 = 3600.0;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "standin_track.csv".into());
    let traj = simulate(&SimParams::study(0.002, FIXES * STRIDE, 1577)).expect("valid parameters");
    let mut out = String::from("time,x,y\n");
    for k in 0..FIXES {
        let p = traj.points[k * STRIDE];
        writeln!(
            out,
            "{:.1},{:.3},{:.3}",
            k as f64 * SECONDS_PER_FIX,
            EASTING + METRES_PER_UNIT * p.x,
            NORTHING + METRES_PER_UNIT * p.y
        )
        .unwrap();
    }
    std::fs::write(&path, out).expect("writable output path");
    println!("wrote {FIXES} fixes to {path}");
}
