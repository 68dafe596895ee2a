//! Divided-power differential operators: symbols, composition, and the
//! identification of restricted symbols with Frobenius-twisted partial
//! derivatives.

use towerlab::diffops::{frobenius_partial, restrict, DiffOperator};
use towerlab::subfields::{realize, SubfieldPresentation};
use towerlab::{FieldSpec, RatFunc};

fn main() -> towerlab::Result<()> {
    let spec = FieldSpec::new(3, &["x", "y"])?;
    let x = RatFunc::var(&spec, 0);
    let y = RatFunc::var(&spec, 1);

    // symbol(i, a) is the divided power (1/a!) d^a/dx_i^a; unlike the plain
    // iterated derivative it survives in characteristic p.
    let d3 = DiffOperator::symbol(&spec, 0, 3);
    let f = x.pow(4).mul(&y)?;
    println!("(1/3!)d^3/dx^3 applied to x^4 y = {}", d3.apply(&f)?);

    // Composition follows the divided-power rule: symbol(a) o symbol(b) =
    // binom(a + b, a) symbol(a + b).
    let d1 = DiffOperator::symbol(&spec, 0, 1);
    let d2 = DiffOperator::symbol(&spec, 0, 2);
    println!(
        "d/dx o (1/2!)d^2/dx^2 = {} (binom(3, 1) = 3 = 0 mod 3)",
        d1.compose(&d2)?
    );
    println!(
        "d/dx o d/dx = {} (binom(2, 1) = 2)",
        d1.compose(&d1)?
    );

    // Restricted to K^(p^m), the symbol of order p^m is exactly the map
    // u^(p^m) -> (du/dx_i)^(p^m).
    for m in [1u32, 2] {
        let w = realize(&SubfieldPresentation::new(&spec, vec![])?, m)?;
        for i in 0..2 {
            let sym = DiffOperator::symbol(&spec, i, 3u32.pow(m));
            let restricted = restrict(&sym, &w)?;
            let twisted = frobenius_partial(&w.relevel(restricted.source().level())?, i, m)?;
            assert!(restricted == twisted);
            println!(
                "restrict(symbol({}, 3^{m}), K^(3^{m})) = Frobenius partial d/d(x_{i}^(3^{m}))",
                spec.var_name(i)
            );
        }
    }
    Ok(())
}
