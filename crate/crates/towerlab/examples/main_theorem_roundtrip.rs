//! The three-way correspondence at finite depth: a power tower of subfields,
//! its sequence of restricted Lie algebras of derivations, and the nested
//! algebras of divided-power differential operators each determine the
//! others.

use towerlab::diffops::algebra_of_tower;
use towerlab::jacobson::{sequence_to_tower, tower_to_sequence, unpack};
use towerlab::subfields::{build_tower, SubfieldPresentation};
use towerlab::{FieldSpec, RatFunc};

fn main() -> towerlab::Result<()> {
    let spec = FieldSpec::new(2, &["x", "y"])?;
    let x = RatFunc::var(&spec, 0);
    let y = RatFunc::var(&spec, 1);

    for (label, gens) in [
        ("k(x)", vec![x.clone()]),
        ("k(x + y^2)", vec![x.add(&y.pow(2))?]),
        ("k(xy)", vec![x.mul(&y)?]),
        ("prime field", vec![]),
    ] {
        let pres = SubfieldPresentation::new(&spec, gens)?;
        let t = build_tower(&pres, 3)?;
        println!("{label}: degrees {:?}", t.degrees());

        // Tower -> derivation sequence -> tower.
        let seq = tower_to_sequence(&t)?;
        println!("  ranks of the derivation sequence: {:?}", seq.ranks());
        let t2 = sequence_to_tower(&seq)?;
        let back = (0..=t.depth()).all(|n| t.level(n).space().equals(t2.level(n).space()));
        println!("  annihilators recover the tower: {back}");
        assert!(back);

        // Tower -> operator algebras -> derivation sequence. `unpack`
        // internally certifies agreement with the iterated tangent sequence.
        let alg = algebra_of_tower(&t)?;
        println!("  operator algebra dimensions: {:?}", alg.dims());
        let seq2 = unpack(&alg)?;
        assert_eq!(seq.ranks(), seq2.ranks());
        println!("  unpacking the algebras recovers the sequence");
    }
    Ok(())
}
