//! Periodic points of the full shift, grid alphabets, products and orbit pseudometrics.

use mdimlab::dynsys::{
    make_grid_interval_shift, make_periodic_shift, make_product, orbit_pseudometric, periodic_index, periodic_symbols,
};
use mdimlab::groups::{FolnerSet, GroupElement};
use mdimlab::metricspace::FinitePseudometricSpace;
use mdimlab::PExponent;

fn main() -> mdimlab::Result<()> {
    let shift = make_periodic_shift(&FinitePseudometricSpace::uniform(2, 1.0), 3)?;
    let x = periodic_index(2, &[0, 0, 1]);
    let f = FolnerSet::interval(0, 3)?;
    for g in f.elements() {
        let y = shift.act(g, x)?;
        println!("{g} . 001 = {:?}", periodic_symbols(2, 3, y));
    }
    let y = periodic_index(2, &[0, 1, 1]);
    for p in [PExponent::finite(1.0)?, PExponent::finite(2.0)?, PExponent::Infinity] {
        println!("rho_F,{p}(001, 011) = {:.4}", orbit_pseudometric(&shift, &f, p, x, y)?);
    }

    let grid = make_grid_interval_shift(4, 2)?;
    println!("grid shift m=4 period 2: {} points, diameter {}", grid.n(), grid.space().diameter());

    let product = make_product(&shift, &grid)?;
    let t = GroupElement::Int(1);
    println!("product: {} points, T(5) = {}", product.n(), product.act(&t, 5)?);
    Ok(())
}
