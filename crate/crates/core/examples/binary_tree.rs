//! Perfect binary trees: the leaf-shift second derivative, its geometric
//! cross term and the temperature above which it diverges with depth.
//!
//! `cargo run --example binary_tree`

use spinlab::exact::{binary_tree_hessian_closed_form, binary_tree_threshold};

fn main() -> spinlab::Result<()> {
    let b0 = binary_tree_threshold();
    println!("threshold beta0 = artanh(1/sqrt 2) = {b0:.8}");
    for beta in [0.6, 1.0, 1.2] {
        let t = binary_tree_hessian_closed_form(beta, 3)?;
        println!("\nbeta = {beta}: 2 tanh^2 = {:.4}", 2.0 * t.r * t.r);
        for k in 3..=12 {
            let t = binary_tree_hessian_closed_form(beta, k)?;
            let mark = if t.value > 0.0 { "  <- violates" } else { "" };
            println!(
                "  k = {k:2}: diagonal {:+12.4} cross {:+12.4} total {:+12.4}{mark}",
                t.diagonal, t.cross, t.value
            );
        }
    }
    Ok(())
}
