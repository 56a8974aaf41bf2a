//! Delta triple and the nine tabulated levels for hydrogen and U91+.

use magpot::hydrogenic::{deltas, hydrogen_level_table};

fn main() -> magpot::Result<()> {
    for z in [1, 92] {
        let d = deltas(z)?;
        println!(
            "Z={z}: delta = ({:.6e}, {:.6e}, {:.6e}), K = {}",
            d.d1, d.d2, d.d3, d.kdot
        );
        for r in hydrogen_level_table(z)? {
            println!(
                "  {:>2} {:<12} E = {:>18.10} dE = {:.10}",
                r.id, r.label, r.energy, r.delta_e
            );
        }
    }
    Ok(())
}
