//! Truncated probes for polynomial first integrals: the low-degree
//! polynomials lying in every level of a power tower.

use towerlab::subfields::{build_tower, first_integrals_probe, foliation_profile, SubfieldPresentation};
use towerlab::{FieldSpec, RatFunc};

fn main() -> towerlab::Result<()> {
    let spec = FieldSpec::new(2, &["x", "y"])?;
    let x = RatFunc::var(&spec, 0);
    let y = RatFunc::var(&spec, 1);

    for (label, gens) in [
        // An integrable foliation: everything in k(x) of small degree
        // survives to every depth.
        ("k(x)", vec![x.clone()]),
        // A graph subfield: its first integrals come from the generator.
        ("k(x + y^2)", vec![x.add(&y.pow(2))?]),
        // The full field: every low-degree polynomial survives trivially.
        ("K itself", vec![x.clone(), y.clone()]),
    ] {
        let t = build_tower(&SubfieldPresentation::new(&spec, gens)?, 3)?;
        println!("{label}: degrees {:?}, profile {:?}", t.degrees(), foliation_profile(&t));
        let probe = first_integrals_probe(&t, 3)?;
        let mut basis: Vec<String> = probe.iter().map(|b| b.to_string()).collect();
        basis.sort();
        println!("  degree <= 3 first integrals: {{{}}}", basis.join(", "));
        // Certify every probe element member-by-member.
        for b in &probe {
            let f = RatFunc::from_poly(b.clone());
            for n in 1..=t.depth() {
                assert!(t.level(n).contains(&f));
            }
        }
        println!("  all {} elements certified in every level", probe.len());
    }
    Ok(())
}
