//! Cutting a cycle open: the transfer matrix, its eigenstructure
//! (Perron eigenvalue Z_B, second eigenvalue Z_B times the beta product),
//! and the rank-2 representation through first and secondary messages.
//!
//! Run with: cargo run --example transfer_matrix

use loopdiag::{
    coefficients, cut_to_tree, exact_partition, rank2_transfer_check, run_lbp, transfer_tensor,
    Caps, LbpConfig, Mrf,
};

fn main() -> loopdiag::Result<()> {
    let m = Mrf::new(
        5,
        vec![
            (0, 1, [[1.7, 0.6], [0.8, 1.5]]),
            (1, 2, [[0.7, 1.6], [1.3, 0.9]]),
            (2, 3, [[1.2, 0.8], [0.5, 1.8]]),
            (3, 4, [[1.5, 0.9], [1.1, 0.6]]),
            (0, 4, [[0.8, 1.2], [1.7, 0.7]]),
        ],
    )?;
    let caps = Caps::default();

    let hat = cut_to_tree(&m)?;
    println!(
        "cycle of {} nodes cut at node {} -> path of {} nodes",
        m.node_count(),
        hat.cut_nodes[0],
        hat.tree.node_count
    );

    let fp = run_lbp(&hat.base, &LbpConfig::default())?;
    let tensor = transfer_tensor(&hat, &caps)?;
    let t = [
        [tensor.value(0, 0), tensor.value(0, 1)],
        [tensor.value(1, 0), tensor.value(1, 1)],
    ];
    println!("\ntransfer matrix T = [[{:.6}, {:.6}], [{:.6}, {:.6}]]", t[0][0], t[0][1], t[1][0], t[1][1]);

    let z = exact_partition(&m, &caps)?;
    println!("trace T = {:.9} = exact Z = {z:.9}", tensor.contract_delta());

    let (l1, l2) = loopdiag::numeric::eigenvalues_2x2(&t).unwrap();
    let coeffs = coefficients(&m, &run_lbp(&m, &LbpConfig::default())?.beliefs);
    let beta_product: f64 = coeffs.beta.iter().product();
    println!("\neigenvalues:");
    println!("  l1 = {l1:.9}   vs Z_B            = {:.9}", fp.z_bethe());
    println!(
        "  l2 = {l2:.9}   vs Z_B * prod beta = {:.9}",
        fp.z_bethe() * beta_product
    );
    println!("  Z = l1 + l2 = {:.9}", l1 + l2);

    let report = rank2_transfer_check(&m, &LbpConfig::default(), &caps)?;
    for check in &report.checks {
        println!(
            "\nrank-2 form at cut node {}: T = mu mu^T + {:.9} * nu nu^T (max entry residual {:.2e})",
            check.cut_node, check.path_beta, check.max_entry_residual
        );
    }
    Ok(())
}
