//! Checks the two defining identities of each B-spline filter bank on a
//! frequency grid: the squared symbol magnitudes sum to one, and the
//! half-shifted cross terms cancel. Both residuals should sit at rounding
//! level for every order.

use framelet::framelets::{bspline_bank, verify_uep};

fn main() -> framelet::Result<()> {
    println!("{:<8} {:>10} {:>14}", "order", "filters", "max residual");
    for order in 1..=4 {
        let bank = bspline_bank(order)?;
        let residual = verify_uep(&bank, 256)?;
        println!("{:<8} {:>10} {:>14.3e}", order, bank.filters().len(), residual);
        assert!(residual < 1e-12, "identity residual too large for order {order}");
    }
    println!("all banks satisfy the frame identities to rounding error");
    Ok(())
}
