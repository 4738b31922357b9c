//! Liminf and limsup proxies of sofic stage values over a small parameter grid.

use mdimlab::dynsys::make_periodic_shift;
use mdimlab::groups::{build_folner_sofic, FolnerSet, GammaPolicy, GroupElement, GroupModel};
use mdimlab::mapspace::{stage_seed, MapLimits};
use mdimlab::metricspace::FinitePseudometricSpace;
use mdimlab::theorems::probe_conjecture;
use mdimlab::PExponent;

fn main() -> mdimlab::Result<()> {
    let sys = make_periodic_shift(&FinitePseudometricSpace::uniform(2, 1.0), 3)?;
    let f_grid = vec![
        FolnerSet::parse(GroupModel::Integers, &["1"])?,
        FolnerSet::parse(GroupModel::Integers, &["1", "2"])?,
    ];
    let elements = [GroupElement::Int(1), GroupElement::Int(2)];
    let sigmas = [4i64, 6, 8]
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let fnn = FolnerSet::interval(0, n)?;
            build_folner_sofic(&fnn, GammaPolicy::SeededRandom(stage_seed(11, i)), &elements)
        })
        .collect::<mdimlab::Result<Vec<_>>>()?;
    let limits = MapLimits {
        sample_budget: 300,
        greedy_fallback: true,
        seed: 11,
        ..MapLimits::default()
    };
    let rows = probe_conjecture(&sys, &sigmas, &f_grid, &[0.25, 0.5], &[0.5, 1.0], PExponent::Infinity, 0.5, &limits)?;
    println!("{:<8} {:>5} {:>4} {:>8} {:>8} {:>8} exact", "F", "delta", "eps", "liminf", "limsup", "gap");
    for r in rows {
        println!(
            "{:<8} {:>5} {:>4} {:>8.4} {:>8.4} {:>8.4} {}",
            r.f.to_string(),
            r.delta,
            r.eps,
            r.liminf_proxy,
            r.limsup_proxy,
            r.gap,
            r.all_exact
        );
    }
    Ok(())
}
