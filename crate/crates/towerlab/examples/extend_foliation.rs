//! Extending a height-one foliation one step: given W_1 with [K : W_1] a
//! power of p and exponent one, search for W_2 of the same rank below it so
//! that the step splits off transversally.

use towerlab::jacobson::{extend_one_foliation, splitting_check};
use towerlab::subfields::{realize, SubfieldPresentation};
use towerlab::{FieldSpec, RatFunc};

fn main() -> towerlab::Result<()> {
    let spec = FieldSpec::new(2, &["x", "y"])?;
    let x = RatFunc::var(&spec, 0);
    let y = RatFunc::var(&spec, 1);

    for (label, gens) in [
        ("k(x)", vec![x.clone()]),
        ("k(x + y^2)", vec![x.add(&y.pow(2))?]),
        ("k(xy)", vec![x.mul(&y)?]),
        ("k(x / (y + 1))", vec![x.div(&y.add(&RatFunc::one(&spec))?)?]),
    ] {
        let pres = SubfieldPresentation::new(&spec, gens)?;
        let w1 = realize(&pres, 1)?;
        println!("{label}: [K : W_1] = {}", w1.codegree());

        let pres2 = extend_one_foliation(&pres)?;
        let gens2: Vec<String> = pres2.generators().iter().map(|g| g.to_string()).collect();
        println!("  extension W_2 = k({})", gens2.join(", "));

        let w2 = realize(&pres2, 2)?;
        println!("  [K : W_2] = {}", w2.codegree());
        let split = splitting_check(&w1, &w2)?;
        println!("  tangent spaces split: {split}");
        assert!(split);
    }
    Ok(())
}
