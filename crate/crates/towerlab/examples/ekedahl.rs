//! The graph family W_n = k(x + A_1 y^p + ... + A_{n-1} y^(p^(n-1)), y^(p^n))
//! and the closed-form differential operators that generate its derivation
//! sequence level by level.

use towerlab::cli::{graph_expected_operator, operator_generates};
use towerlab::corpus::shifted_graph_levels;
use towerlab::diffops::algebra_of_tower;
use towerlab::jacobson::unpack;
use towerlab::subfields::build_tower_explicit;
use towerlab::FieldSpec;

fn main() -> towerlab::Result<()> {
    for (p, a, depth) in [(2u32, vec![1u32, 1], 3usize), (3, vec![1, 2], 2)] {
        let spec = FieldSpec::new(p, &["x", "y"])?;
        println!("p = {p}, coefficients A = {a:?}");
        let levels = shifted_graph_levels(&spec, &a, depth);
        for (n, pres) in levels.iter().enumerate() {
            let gens: Vec<String> = pres.generators().iter().map(|g| g.to_string()).collect();
            println!("  W_{} = k({})", n + 1, gens.join(", "));
        }
        let t = build_tower_explicit(&levels)?;
        println!("  degrees: {:?}", t.degrees());

        // Recover the derivation sequence from the operator algebras alone,
        // then compare each level against the predicted closed form.
        let alg = algebra_of_tower(&t)?;
        let seq = unpack(&alg)?;
        for n in 1..=depth {
            let expected = graph_expected_operator(&spec, &a, n);
            let ok = operator_generates(&expected, seq.algebra(n))?;
            println!(
                "  level {n}: F_{n} generated by {expected}  [{}]",
                if ok { "confirmed" } else { "MISMATCH" }
            );
            assert!(ok);
        }
        println!();
    }
    Ok(())
}
