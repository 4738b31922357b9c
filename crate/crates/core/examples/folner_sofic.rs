//! Følner sets of the integers and the sofic approximation they induce.

use mdimlab::groups::{build_folner_sofic, folner_defect, sofic_defects, FolnerSet, GammaPolicy, GroupElement};

fn main() -> mdimlab::Result<()> {
    let elements: Vec<GroupElement> = (-2..=2).map(GroupElement::Int).collect();
    for n in [10i64, 100, 1000] {
        let f = FolnerSet::interval(0, n)?;
        let sigma = build_folner_sofic(&f, GammaPolicy::OrderPreserving, &elements)?;
        let fd = folner_defect(&f, &GroupElement::Int(1))?;
        let d11 = sofic_defects(&sigma, &GroupElement::Int(1), &GroupElement::Int(1))?;
        let d1m2 = sofic_defects(&sigma, &GroupElement::Int(1), &GroupElement::Int(-2))?;
        let d01 = sofic_defects(&sigma, &GroupElement::Int(0), &GroupElement::Int(1))?;
        println!(
            "[0,{n}): folner(1) = {fd}, mul_defect(1,1) = {}, mul_defect(1,-2) = {}, agreement(0,1) = {}",
            d11.mul_defect, d1m2.mul_defect, d01.dist_agreement
        );
    }

    let f = FolnerSet::interval(0, 6)?;
    let sigma = build_folner_sofic(&f, GammaPolicy::SeededRandom(3), &elements)?;
    println!("seeded gamma, sigma(1) on [0,6): {:?}", sigma.perm(&GroupElement::Int(1))?);
    println!("{}", serde_json::to_string(&sigma)?);
    Ok(())
}
