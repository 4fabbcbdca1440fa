//! First and secondary messages at a reparametrized fixed point, and the
//! rules they obey: orthogonality and collision identities at nodes
//! (f_n(gamma) for n secondary messages), beta-attenuated transport along
//! edges, and the identity decomposition at degree-2 nodes.
//!
//! Run with: cargo run --example propagation_rules

use loopdiag::{
    coefficients, f_eval, first_messages, reparametrize, run_lbp, secondary_messages,
    transform_degree_three, verify_propagation_rules, LbpConfig, Mrf,
};

fn main() -> loopdiag::Result<()> {
    // K5: every node has degree 4, so the degree-3 transform splits all of
    // them and inserts delta edges (whose beta is exactly 1).
    let mut edges = Vec::new();
    let couplings = [
        1.5, 0.7, 1.2, 0.8, 1.6, 0.6, 1.1, 0.9, 1.4, 0.75,
    ];
    let mut k = 0;
    for i in 0..5usize {
        for j in i + 1..5 {
            let c = couplings[k];
            k += 1;
            edges.push((i, j, [[c, 1.0 / c], [1.0 / c, c]]));
        }
    }
    let m = Mrf::new(5, edges)?;

    let (transformed, origin) = transform_degree_three(&m)?;
    println!(
        "degree-3 transform: {} nodes / {} edges -> {} nodes / {} edges ({} delta edges)",
        m.node_count(),
        m.edge_count(),
        transformed.node_count(),
        transformed.edge_count(),
        transformed.edges().iter().filter(|e| e.delta).count(),
    );
    println!("chain ownership of fresh nodes: {origin:?}");

    let fp = run_lbp(&transformed, &LbpConfig::default())?;
    assert!(fp.converged);
    let reparam = reparametrize(&transformed, &fp)?;
    let mu = first_messages(&reparam, &fp.beliefs)?;
    let nu = secondary_messages(&reparam, &fp.beliefs)?;
    let coeffs = coefficients(&reparam, &fp.beliefs);

    let report = verify_propagation_rules(&reparam, &mu, &nu, &coeffs)?;
    println!(
        "\nall {} rule checks hold; worst residual {:.2e} (tolerance {:.0e})",
        report.checks.len(),
        report.max_residual,
        report.tolerance
    );

    // Show one collision table: sum_x nu^n mu^(d-n) = f_n(gamma) at a node.
    let v = 0;
    let d = reparam.degree(v);
    let gamma = coeffs.gamma[v];
    let mu_v = mu.get(&reparam, v, reparam.neighbors(v).next().unwrap()).unwrap();
    let nu_v = nu.at_node(v);
    println!("\ncollisions at node {v} (degree {d}, gamma = {gamma:.6}):");
    println!("{:>3} {:>16} {:>16}", "n", "message sum", "f_n(gamma)");
    for n in 0..=d {
        let sum = loopdiag::messages::collision_sum(mu_v, nu_v, d, n);
        println!("{n:>3} {sum:>16.12} {:>16.12}", f_eval(n, gamma));
    }

    // Delta edges transport secondary messages with beta = 1.
    for (idx, e) in reparam.edges().iter().enumerate() {
        if e.delta {
            println!(
                "\ndelta edge ({}, {}): beta = {:.12} (exactly 1 by construction)",
                e.i, e.j, coeffs.beta[idx]
            );
            break;
        }
    }
    Ok(())
}
