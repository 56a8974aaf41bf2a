//! The energy functional of helium at fixed exponents in all three modes.

use magpot::functional::{evaluate, FunctionalMode};
use magpot::quantum::{Configuration, Orbital};

fn main() -> magpot::Result<()> {
    let he = Configuration::new(
        2,
        vec![
            Orbital::new(1, 0, 0, 0, 0, 2.20144),
            Orbital::new(1, 0, 0, 0, 1, 1.20162),
        ],
    );
    for mode in FunctionalMode::ALL {
        let r = evaluate(&he, mode)?;
        println!(
            "{mode:<16} W = {:.8}  A = {:.6}  u12 = {:.6}",
            r.w, r.a, r.overlaps[0][1]
        );
    }
    Ok(())
}
