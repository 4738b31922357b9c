//! The constants `c` and `ε'` and the bound `N_ε(Map, ρ_∞) ≤ λ^d N_ε'(Map, ρ_p)`.

use mdimlab::mapspace::MapLimits;
use mdimlab::metricspace::SolverLimits;
use mdimlab::theorems::{compute_prop32_constants, map_instance, verify_prop32, FamilyParams};
use mdimlab::PExponent;

fn main() -> mdimlab::Result<()> {
    for (lambda, m, p) in [(2.0, 4, 1.0), (1.5, 4, 2.0), (4.0, 16, 5.0)] {
        let k = compute_prop32_constants(lambda, m, PExponent::finite(p)?, 0.5)?;
        println!(
            "lambda {lambda} M {m} p {p}: c = {:.4}, eps' = {:.5}, invariants {}",
            k.c,
            k.eps_prime,
            k.invariants_hold()
        );
    }

    let limits = MapLimits {
        solver: SolverLimits::with_exact_guard(256),
        ..MapLimits::default()
    };
    let inst = map_instance(31, 0, &FamilyParams::default())?;
    for lambda in [1.5, 2.0, 4.0] {
        let r = verify_prop32(&inst.id, &inst.spec(), inst.eps, inst.p, lambda, &limits)?;
        for c in &r.checks {
            println!("  lambda {lambda}: {} lhs {:.4} rhs {:.4} slack {:.4}", c.name, c.lhs, c.rhs, c.slack);
        }
    }
    Ok(())
}
