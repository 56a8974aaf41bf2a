//! Minimise the helium ground state and a triplet excited state.

use magpot::optimizer::{minimize, MinimizeOptions};
use magpot::quantum::{Configuration, Orbital};

fn main() -> magpot::Result<()> {
    let ground = Configuration::new(
        2,
        vec![
            Orbital::new(1, 0, 0, 0, 0, 1.0),
            Orbital::new(1, 0, 0, 0, 1, 1.0),
        ],
    );
    let triplet = Configuration::new(
        2,
        vec![
            Orbital::new(1, 0, 0, 0, 0, 1.0),
            Orbital::new(2, 0, 0, 0, 0, 1.0),
        ],
    )
    .with_s(0, 1, 0);
    let opts = MinimizeOptions::default();
    let g = minimize(&ground, &opts)?;
    let t = minimize(&triplet, &opts)?;
    println!(
        "ground  E = {:.8} xi = {:?} ({} evaluations)",
        g.energy, g.xi_star, g.evals
    );
    println!(
        "triplet E = {:.8} xi = {:?} constrained {:?}",
        t.energy, t.xi_star, t.constrained_pairs
    );
    println!("dE = {:.8}", t.energy - g.energy);
    Ok(())
}
