use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use octasplat::fit::{fit, psnr, render_views, ssim, write_loss_csv, FitConfig};
use octasplat::fixtures::{orbit_cameras, random_init, synthetic_scene};
use octasplat::io::{
    export_splat_mesh, load_cameras, load_gs_ply, load_solid_mesh, save_cameras, save_gs_ply, MeshFormat,
};
use octasplat::{apply_edit, render_image, EditSpec, Image, PreparedScene, Scene};

use crate::settings::Settings;
use crate::{Cli, Command, ExportFormat, UsageError};

pub fn run(cli: Cli) -> Result<()> {
    let settings = Settings::resolve(&cli.settings)?;
    match cli.command {
        Command::Render {
            splats,
            cameras,
            out,
            meshes,
            lights,
        } => {
            settings.log("render");
            let loaded = load_gs_ply(&splats)?;
            let mut solids = Vec::with_capacity(meshes.len());
            for m in meshes {
                solids.push(load_solid_mesh(&m.path, m.material)?.mesh);
            }
            let scene = Scene {
                splats: loaded.splats,
                solids,
                lights,
            };
            scene.validate()?;
            let cams = load_cameras(&cameras, (settings.width, settings.height))?;
            let config = settings.render_config()?;
            let prepared = PreparedScene::new(&scene, &config.level);
            create_dir(&out)?;
            for (i, cam) in cams.iter().enumerate() {
                let image = render_image(&prepared, cam, &config, settings.workers)?;
                image.save_png(out.join(format!("{i:05}.png")))?;
            }
            println!("rendered {} images of {} splats to {}", cams.len(), scene.splats.len(), out.display());
        }
        Command::Edit { splats, spec, out } => {
            settings.log("edit");
            let loaded = load_gs_ply(&splats)?;
            let text = std::fs::read_to_string(&spec).with_context(|| format!("cannot read {}", spec.display()))?;
            let spec = EditSpec::from_json(&text).with_context(|| format!("invalid edit spec {}", spec.display()))?;
            let outcome = apply_edit(&loaded.splats, &spec, &settings.level()?)?;
            if outcome.edited.is_empty() {
                log::warn!("the selection matched no splats");
            }
            save_gs_ply(&outcome.splats, &out)?;
            println!("edited {} splats, wrote {}", outcome.edited.len(), out.display());
        }
        Command::Export { splats, format, out } => {
            settings.log("export");
            let loaded = load_gs_ply(&splats)?;
            let format = match format {
                ExportFormat::Obj => MeshFormat::Obj,
                ExportFormat::Ply => MeshFormat::Ply,
            };
            let stats = export_splat_mesh(&loaded.splats, &settings.level()?, &out, format)?;
            println!("wrote {} vertices and {} triangles to {}", stats.vertices, stats.triangles, out.display());
        }
        Command::Fit {
            init,
            synthetic,
            init_splats,
            self_fit,
            targets,
            cameras,
            iterations,
            seed,
            out,
            csv,
        } => {
            settings.log("fit");
            let job = FitJob {
                init,
                synthetic,
                init_splats,
                self_fit,
                targets,
                cameras,
                seed,
            };
            run_fit(&settings, job, iterations, &out, csv.as_deref())?;
        }
        Command::Eval { renders, references } => {
            settings.log("eval");
            run_eval(&renders, &references)?;
        }
        Command::Synth { count, out, views, seed } => {
            settings.log("synth");
            create_dir(&out)?;
            save_gs_ply(&synthetic_scene(count, seed), out.join("splats.ply"))?;
            let cams = orbit_cameras(views, 3.0, settings.width, settings.height)?;
            save_cameras(&cams, out.join("cameras.json"))?;
            println!("wrote {count} splats and {views} cameras to {}", out.display());
        }
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn png_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.with_context(|| format!("cannot read directory {}", dir.display()))?.path();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

struct FitJob {
    init: Option<PathBuf>,
    synthetic: Option<usize>,
    init_splats: usize,
    self_fit: bool,
    targets: Option<PathBuf>,
    cameras: Option<PathBuf>,
    seed: u64,
}

fn run_fit(settings: &Settings, job: FitJob, iterations: usize, out: &Path, csv: Option<&Path>) -> Result<()> {
    let render = settings.render_config()?;
    let config = FitConfig {
        iterations,
        render: render.clone(),
        workers: settings.workers,
        ..FitConfig::default()
    };
    config.validate().map_err(|e| UsageError(e.to_string()))?;

    let cameras = match &job.cameras {
        Some(path) => load_cameras(path, (settings.width, settings.height))?,
        None if job.synthetic.is_some() => orbit_cameras(4, 3.0, settings.width, settings.height)?,
        None => return Err(UsageError("--cameras is required unless --synthetic is given".into()).into()),
    };

    let (reference, initial) = match (job.synthetic, &job.init) {
        (Some(n), _) => {
            let truth = synthetic_scene(n, job.seed);
            let start = if job.self_fit {
                truth.clone()
            } else {
                random_init(job.init_splats, job.seed.wrapping_add(1), 0.7)
            };
            (Some(truth), start)
        }
        (None, Some(path)) => {
            let splats = load_gs_ply(path)?.splats;
            (job.self_fit.then(|| splats.clone()), splats)
        }
        (None, None) => return Err(UsageError("either --init or --synthetic is required".into()).into()),
    };

    let targets = match (&job.targets, reference) {
        (Some(dir), _) => {
            let files = png_files(dir)?;
            if files.len() != cameras.len() {
                bail!("{} holds {} PNG files but there are {} cameras", dir.display(), files.len(), cameras.len());
            }
            files.iter().map(Image::load_png_linear).collect::<octasplat::Result<Vec<_>>>()?
        }
        (None, Some(truth)) => render_views(&truth, &cameras, &render, settings.workers)?,
        (None, None) => return Err(UsageError("--targets is required without --synthetic or --self-fit".into()).into()),
    };

    let result = fit(&initial, &targets, &cameras, &config)?;
    save_gs_ply(&result.splats, out)?;
    if let Some(path) = csv {
        write_loss_csv(&result.history, path)?;
    }
    let first = result.history.first().expect("history is never empty");
    let last = result.history.last().expect("history is never empty");
    println!(
        "loss {:.6e} -> {:.6e}, PSNR {:.2} -> {:.2} dB over {} iterations; wrote {}",
        first.loss,
        last.loss,
        first.psnr,
        last.psnr,
        iterations,
        out.display()
    );
    Ok(())
}

fn run_eval(renders: &Path, references: &Path) -> Result<()> {
    let a = png_files(renders)?;
    let b = png_files(references)?;
    if a.len() != b.len() {
        bail!("{} has {} images but {} has {}", renders.display(), a.len(), references.display(), b.len());
    }
    if a.is_empty() {
        bail!("no PNG files in {}", renders.display());
    }
    println!("{:<32} {:>10} {:>8}", "image", "PSNR", "SSIM");
    let (mut psnr_sum, mut ssim_sum) = (0.0, 0.0);
    for (pa, pb) in a.iter().zip(&b) {
        let ia = Image::load_png_encoded(pa)?;
        let ib = Image::load_png_encoded(pb)?;
        let p = psnr(&ia, &ib).with_context(|| format!("comparing {} with {}", pa.display(), pb.display()))?;
        let s = ssim(&ia, &ib)?;
        psnr_sum += p;
        ssim_sum += s;
        let name = pa.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        println!("{name:<32} {p:>10.4} {s:>8.4}");
    }
    let n = a.len() as f64;
    println!("{:<32} {:>10.4} {:>8.4}", "mean", psnr_sum / n, ssim_sum / n);
    Ok(())
}
