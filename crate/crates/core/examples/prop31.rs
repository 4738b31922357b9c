//! `N_ε(Map, ρ_p) ≤ N_ε(Map, ρ_∞)` on a seeded family of small instances.

use mdimlab::mapspace::MapLimits;
use mdimlab::theorems::{map_instance_family, verify_prop31, FamilyParams};

fn main() -> mdimlab::Result<()> {
    let limits = MapLimits {
        solver: mdimlab::metricspace::SolverLimits::with_exact_guard(256),
        ..MapLimits::default()
    };
    let family = map_instance_family(2024, 12, &FamilyParams::default())?;
    for inst in &family {
        let r = verify_prop31(&inst.id, &inst.spec(), inst.eps, inst.p, &limits)?;
        let c = &r.checks[0];
        println!(
            "{} p={:<4} eps={:<5} delta={:<5} N_p = {:>3} <= N_inf = {:>3}  {}",
            inst.id,
            inst.p.to_string(),
            inst.eps,
            inst.delta,
            c.lhs,
            c.rhs,
            if c.pass { "ok" } else { "VIOLATED" }
        );
    }
    Ok(())
}
