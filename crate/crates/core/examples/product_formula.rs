//! Product systems: map-space containments and the stage-wise product bounds.

use mdimlab::mapspace::MapLimits;
use mdimlab::metricspace::SolverLimits;
use mdimlab::theorems::{product_instance_family, verify_product, FamilyParams};

fn main() -> mdimlab::Result<()> {
    let limits = MapLimits {
        solver: SolverLimits::with_exact_guard(1296),
        ..MapLimits::default()
    };
    for inst in product_instance_family(77, 6, &FamilyParams::products())? {
        let (lemma, stage) = verify_product(&inst.id, &inst.as_instance(), &limits)?;
        println!("{} |X|={} |Y|={} d={}", inst.id, inst.x.n(), inst.y.n(), inst.sigma.d());
        for c in lemma.checks.iter().chain(&stage.checks) {
            println!("  {:<36} {:>9.4} <= {:>9.4}  {}", c.name, c.lhs, c.rhs, c.pass);
        }
    }
    Ok(())
}
