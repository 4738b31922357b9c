//! Orbit maps of the binary period-3 shift inside the sofic map space.

use mdimlab::dynsys::make_periodic_shift;
use mdimlab::groups::{FolnerSet, GroupModel};
use mdimlab::metricspace::FinitePseudometricSpace;
use mdimlab::theorems::verify_orbit_identity;

fn main() -> mdimlab::Result<()> {
    let sys = make_periodic_shift(&FinitePseudometricSpace::uniform(2, 1.0), 3)?;
    let fnn = FolnerSet::interval(0, 3)?;
    for items in [vec!["1"], vec!["1", "2"], vec!["-1", "1"]] {
        let f = FolnerSet::parse(GroupModel::Integers, &items)?;
        for delta in [0.3, 0.6, 1.0] {
            let r = verify_orbit_identity("orbit", &sys, &fnn, &f, delta)?;
            let checks: Vec<String> = r.checks.iter().map(|c| format!("{}={}", c.name, c.pass)).collect();
            println!("F={f} delta={delta}: {}", checks.join(" "));
            for n in &r.notes {
                println!("    {n}");
            }
        }
    }
    Ok(())
}
