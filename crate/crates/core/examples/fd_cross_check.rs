//! Particle grid vs the finite-volume field on the one-receiver preset.
//!
//! Both interface models are compared. The continuous model imposes equal
//! concentration on either side of the boundary; the partitioned model
//! imposes the `√(D/D_eff)` jump produced by the particle scaling rule. The
//! report separates the Poisson part of the discrepancy from the systematic
//! part.
//!
//! `cargo run --release --example fd_cross_check -- [particles]`

use spheroid_sim::validate::{self, Scale};

fn main() -> spheroid_sim::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100_000);
    let scale = Scale { n, ..Scale::desk() };
    let (check, r) = validate::check_fd_cross_check(&scale)?;
    println!("pixels compared        {}", r.pixels);
    println!("L2 continuous          {:.4}", r.l2_continuous);
    println!("L2 partitioned         {:.4}", r.l2_partitioned);
    println!("Poisson floor          {:.4}", r.poisson_floor);
    println!("bias continuous        {:.4}", r.bias_continuous);
    println!("bias partitioned       {:.4}", r.bias_partitioned);
    println!("amplification (PBS)    {:.3}", r.amplification);
    println!("amplification (field)  {:.3}", r.amplification_partitioned);
    println!("edge mass fraction     {:.2e}", r.max_edge_fraction);
    println!("{check}");
    Ok(())
}
