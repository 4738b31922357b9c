//! `ln N_ε(X, ρ_{F_n,p}) / |F_n|` for grid-interval shifts against `ln(m+1)/ln m`.

use mdimlab::dynsys::make_grid_interval_shift;
use mdimlab::groups::FolnerSet;
use mdimlab::mapspace::amenable_finite_stage;
use mdimlab::metricspace::SolverLimits;
use mdimlab::PExponent;

fn main() -> mdimlab::Result<()> {
    let limits = SolverLimits::default();
    for m in [2usize, 3, 4, 8] {
        let sys = make_grid_interval_shift(m, 4)?;
        let fns: Vec<FolnerSet> = (1..=4).map(|n| FolnerSet::interval(0, n)).collect::<Result<_, _>>()?;
        let s = amenable_finite_stage(&sys, &fns, 1.0 / m as f64, PExponent::Infinity, &limits)?;
        let ratios: Vec<String> = s.ratios.iter().map(|r| format!("{r:.4}")).collect();
        println!(
            "m={m}: ratios over [0,1)..[0,4) = {}, ln(m+1)/ln m = {:.4}",
            ratios.join(", "),
            ((m + 1) as f64).ln() / (m as f64).ln()
        );
    }
    Ok(())
}
