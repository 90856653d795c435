//! Porosity, tortuosity and effective diffusion for a range of cell counts.
//!
//! Run with `cargo run --example porosity_table`.

use spheroid_sim::config::REFERENCE_CELL_VOLUME;
use spheroid_sim::scene::tortuosity;
use spheroid_sim::{effective_diffusion, porosity, sphere_volume, MICRON};

fn main() -> spheroid_sim::Result<()> {
    let d_bulk = 1e-9;
    let v_s = sphere_volume(275.0 * MICRON);
    println!("spheroid volume (r = 275 um): {v_s:.6e} m^3");
    println!(
        "{:>8} {:>10} {:>10} {:>14} {:>10}",
        "N_c", "porosity", "tortuosity", "D_eff m^2/s", "D_eff/D"
    );
    for n_cells in [0, 5_000, 10_000, 16_000, 20_000, 24_000, 26_000] {
        let eps = porosity(v_s, n_cells, REFERENCE_CELL_VOLUME)?;
        let d_eff = effective_diffusion(d_bulk, eps)?;
        println!(
            "{n_cells:>8} {eps:>10.4} {:>10.4} {d_eff:>14.4e} {:>10.4}",
            tortuosity(eps)?,
            d_eff / d_bulk
        );
    }
    match porosity(v_s, 30_000, REFERENCE_CELL_VOLUME) {
        Err(e) => println!("30000 cells: {e}"),
        Ok(eps) => println!("30000 cells: {eps}"),
    }
    Ok(())
}
