//! Draws H(F) >= I(F;A) >= I(F;T) as nested disks whose areas are
//! proportional to the bits they represent.
//!
//!     cargo run --example info_diagram -- out.svg

use chanmi::diagram::{layout_values, render_svg, LayoutOptions};

fn main() -> chanmi::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "info_diagram.svg".into());
    let opts = LayoutOptions {
        offset: 0.6,
        legend: vec!["outer: H(F)  middle: I(F;A)  inner: I(F;T)".into()],
        ..LayoutOptions::default()
    };
    let mut spec = layout_values(1.0, 0.22, 0.02, &opts)?;
    spec.title = "sarcasm".into();
    spec.description = "areas in bits".into();
    for c in &spec.circles {
        println!("{:<7} {:.3} bits  r = {:.2}", c.label, c.bits, c.r);
    }
    std::fs::write(&path, render_svg(&spec))?;
    println!("wrote {path}");
    Ok(())
}
