//! One electron-electron coupling integral: analytic value next to the
//! six-dimensional quadrature oracle.

use magpot::hydrogenic::{deltas, Shape};
use magpot::integrals::quad::coupling_quadrature;
use magpot::integrals::{coupling_shapes, InteractionTerm};
use magpot::quantum::Orbital;

fn main() -> magpot::Result<()> {
    let d = deltas(2)?;
    let a = Shape::new(&Orbital::new(1, 0, 0, 0, 0, 1.7), &d)?;
    let b = Shape::new(&Orbital::new(2, 1, 0, 0, 0, 0.9), &d)?;
    let h = InteractionTerm::coulomb(1.0);
    for (name, [p, q, r, s]) in [("direct", [&a, &a, &b, &b]), ("exchange", [&a, &b, &a, &b])] {
        let got = coupling_shapes(p, q, r, s, &h)?;
        let want = coupling_quadrature(p, q, r, s, &h, 1e-9)?;
        println!("{name:<8} analytic {:.12} quadrature {want:.12}", got.value);
    }
    Ok(())
}
