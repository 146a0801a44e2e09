//! Fit 64 random splats to four views of a seeded three-splat scene and
//! report the PSNR gain.

use octasplat::fit::{fit, render_views, FitConfig};
use octasplat::fixtures::{orbit_cameras, random_init, synthetic_scene};

fn main() -> octasplat::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let truth = synthetic_scene(3, 2024);
    let cameras = orbit_cameras(4, 3.0, 64, 64)?;
    let mut config = FitConfig::default();
    if let Some(&lr) = args.first() {
        config.learning_rates.color = lr;
        config.learning_rates.opacity = lr;
        config.learning_rates.mean = lr / 10.0;
        config.learning_rates.rotation = lr / 10.0;
        config.learning_rates.scale = lr / 10.0;
    }
    let targets = render_views(&truth, &cameras, &config.render, None)?;
    let start = std::time::Instant::now();
    let result = fit(&random_init(64, 7, 0.7), &targets, &cameras, &config)?;
    for r in result.history.iter().step_by(50) {
        println!("{:4} loss {:.4e} psnr {:.2}", r.iteration, r.loss, r.psnr);
    }
    println!(
        "initial {:.2} dB, final {:.2} dB, gain {:.2} dB in {:.1?}",
        result.initial_psnr(),
        result.final_psnr(),
        result.final_psnr() - result.initial_psnr(),
        start.elapsed()
    );
    Ok(())
}
