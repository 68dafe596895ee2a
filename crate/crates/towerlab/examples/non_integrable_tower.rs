//! The all-ones graph family W_n = k(x + y^p + ... + y^(p^(n-1)), y^(p^n))
//! looks like a candidate for a foliation without algebraic first integrals,
//! but it is in fact algebraically integrable: f = x^p - x - y^p is a
//! polynomial first integral, and every level is exactly the Frobenius
//! thickening of k(f).

use towerlab::corpus::twisted_levels;
use towerlab::subfields::{
    build_tower, build_tower_explicit, first_integrals_probe, foliation_profile,
    SubfieldPresentation,
};
use towerlab::{FieldSpec, RatFunc};

fn main() -> towerlab::Result<()> {
    let p = 2u32;
    let depth = 3;
    let spec = FieldSpec::new(p, &["x", "y"])?;
    let t = build_tower_explicit(&twisted_levels(&spec, depth))?;
    println!("degrees: {:?}", t.degrees());
    println!("profile: {:?}", foliation_profile(&t));

    // The truncated probe for polynomial first integrals of small degree.
    let probe = first_integrals_probe(&t, 2 * p)?;
    let mut found: Vec<String> = probe.iter().map(|b| b.to_string()).collect();
    found.sort();
    println!("degree <= {} elements of every level: {{{}}}", 2 * p, found.join(", "));

    // The Artin-Schreier polynomial is among them, and it explains the whole
    // family: the tower of k(f) coincides with the explicit tower level by
    // level.
    let x = RatFunc::var(&spec, 0);
    let y = RatFunc::var(&spec, 1);
    let f = x.pow(p).sub(&x)?.sub(&y.pow(p))?;
    for n in 1..=t.depth() {
        assert!(t.level(n).contains(&f), "f should lie in W_{n}");
    }
    println!("f = {f} lies in every level");

    let tf = build_tower(&SubfieldPresentation::new(&spec, vec![f.clone()])?, depth)?;
    let same = (0..=depth).all(|n| t.level(n).space().equals(tf.level(n).space()));
    println!(
        "tower of k(f) {} the explicit tower",
        if same { "equals" } else { "DIFFERS FROM" }
    );
    assert!(same);
    Ok(())
}
