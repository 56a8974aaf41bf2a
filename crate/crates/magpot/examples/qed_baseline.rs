//! Dirac energies with the Lamb and magnetic terms for the QED column levels.

use magpot::qed::{qed_level, QED_COLUMN_LEVELS};

fn main() -> magpot::Result<()> {
    for z in [1, 92] {
        println!("Z={z}");
        for (n, l, m, j) in QED_COLUMN_LEVELS {
            let q = qed_level(n, l, m, j, z)?;
            println!(
                "  ({n},{l},{m},{j}) dirac {:.10} lamb {:.3e} magnetic {:.3e} total {:.10}",
                q.dirac, q.lamb, q.magnetic, q.energy
            );
        }
    }
    Ok(())
}
