//! Random permutation approximations of the free group of rank 2.

use mdimlab::groups::{build_random_sofic, sofic_defects, GroupModel};

fn main() -> mdimlab::Result<()> {
    let free = GroupModel::FreeRank2;
    let e = free.identity();
    let a = free.parse_element("a")?;
    let b = free.parse_element("b")?;
    let ab = free.parse_element("ab")?;
    for d in [10, 100, 1000, 10_000] {
        let sigma = build_random_sofic(d, 7)?;
        let fixed = sofic_defects(&sigma, &a, &e)?.dist_agreement;
        let ab_b = sofic_defects(&sigma, &ab, &b)?.dist_agreement;
        let agree = sofic_defects(&sigma, &a, &b)?.dist_agreement;
        println!("d = {d:>5}: fix(a) = {fixed}, agree(a,b) = {agree}, agree(ab,b) = {ab_b}");
    }
    println!("ball of radius 2 has {} elements", free.ball(2).len());
    Ok(())
}
