//! The regular-graph correspondence: theta(beta, gamma) against the Ising
//! partition function Z(K, h) on C4 and K4, and the zero-field
//! susceptibility formula against a finite-difference oracle.
//!
//! Run with: cargo run --example ising_regular

use loopdiag::{corollary_change_of_variables, susceptibility_check, Caps, Mrf};

fn main() -> loopdiag::Result<()> {
    let caps = Caps::default();

    println!("change-of-variables identity theta = Z(K,h) * A^|E| * B^|V|:");
    println!(
        "{:<6} {:>5} {:>5} {:>10} {:>10} {:>14} {:>12}",
        "graph", "y", "z", "K", "h", "theta", "rel err"
    );
    for (name, m) in [("C4", Mrf::cycle(4)?), ("K4", Mrf::complete(4)?)] {
        for (y, z) in [(0.0, 0.3), (0.2, 0.3), (-0.3, 0.2), (0.4, -0.4)] {
            let rep = corollary_change_of_variables(&m, y, z, &caps)?;
            println!(
                "{name:<6} {y:>5} {z:>5} {:>10.5} {:>10.5} {:>14.9} {:>12.2e}",
                rep.params.coupling, rep.params.field, rep.theta, rep.rel_err
            );
        }
    }
    println!("(y = 0 rows: h = 0 and beta = z — the plain high-temperature expansion)");

    println!("\nzero-field susceptibility (global), formula vs d^2 log Z / dh^2:");
    println!(
        "{:<6} {:>5} {:>14} {:>14} {:>12} {:>14}",
        "graph", "K", "formula", "oracle", "rel err", "Bethe per spin"
    );
    for (name, m) in [("C4", Mrf::cycle(4)?), ("K4", Mrf::complete(4)?)] {
        for k in [0.1, 0.2, 0.3] {
            let rep = susceptibility_check(&m, k, &caps)?;
            println!(
                "{name:<6} {k:>5} {:>14.9} {:>14.9} {:>12.2e} {:>14.9}",
                rep.chi_formula, rep.chi_fd, rep.rel_err, rep.bethe_chi_per_spin
            );
        }
    }
    Ok(())
}
