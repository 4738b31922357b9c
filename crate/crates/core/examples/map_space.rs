//! Enumerating and counting `Map(ρ, F, δ, σ)` for the binary period-2 shift.

use mdimlab::dynsys::make_periodic_shift;
use mdimlab::groups::{build_folner_sofic, FolnerSet, GammaPolicy, GroupElement};
use mdimlab::mapspace::{enumerate_mapspace, is_member, mapspace_count, CountKind, MapLimits, MapSpaceSpec, MapTuple};
use mdimlab::metricspace::{CountMode, FinitePseudometricSpace};
use mdimlab::PExponent;

fn main() -> mdimlab::Result<()> {
    let sys = make_periodic_shift(&FinitePseudometricSpace::uniform(2, 1.0), 2)?;
    let f = FolnerSet::new(vec![GroupElement::Int(1)])?;
    let base = FolnerSet::interval(0, 4)?;
    let sigma = build_folner_sofic(&base, GammaPolicy::OrderPreserving, f.elements())?;
    let limits = MapLimits::default();

    for delta in [0.0, 0.5, 0.75, 1.0] {
        let spec = MapSpaceSpec::new(&sys, &sigma, &f, delta);
        let members = enumerate_mapspace(&spec)?;
        let n = mapspace_count(&spec, 1.0, PExponent::Infinity, CountKind::Separated, CountMode::Exact, &limits)?;
        let s = mapspace_count(&spec, 0.5, PExponent::finite(1.0)?, CountKind::Spanning, CountMode::Exact, &limits)?;
        println!(
            "delta {delta:>4}: |Map| = {:>3}, N_1(rho_inf) = {:>3}, S_0.5(rho_1) = {:>3} ({})",
            members.len(),
            n.value,
            s.value,
            s.exactness
        );
    }

    let spec = MapSpaceSpec::new(&sys, &sigma, &f, 0.5);
    let m = is_member(&spec, &MapTuple(vec![0, 1, 0, 1]))?;
    println!("[0,1,0,1]: member = {}, residual = {:.4}", m.member, m.residual);
    Ok(())
}
