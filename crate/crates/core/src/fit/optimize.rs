use std::io::Write;
use std::path::Path;

use glam::{DQuat, DVec3};
use rayon::prelude::*;

use super::backward::{backward_ray, GradientBuffer, PARAMS_PER_SPLAT};
use super::metrics::psnr_from_mse;
use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::render::{aggregate_color, with_workers, Image, PreparedScene, RenderConfig};
use crate::scene::Scene;
use crate::splat::FlatGaussian;

/// Image rows are split into at most this many blocks per view. Blocks
/// depend only on the image size, so gradient sums do not depend on the
/// worker count.
const BLOCKS_PER_VIEW: usize = 16;

const OPACITY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningRates {
    pub color: f64,
    /// Step size for the opacity logit.
    pub opacity: f64,
    pub mean: f64,
    pub rotation: f64,
    /// Step size for the log in-plane scales.
    pub scale: f64,
}

impl Default for LearningRates {
    fn default() -> Self {
        Self {
            color: 0.02,
            opacity: 0.02,
            mean: 0.002,
            rotation: 0.002,
            scale: 0.002,
        }
    }
}

impl LearningRates {
    fn per_slot(&self) -> [f64; PARAMS_PER_SPLAT] {
        let (c, o, m, r, s) = (self.color, self.opacity, self.mean, self.rotation, self.scale);
        [c, c, c, o, m, m, m, r, r, r, r, s, s]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub iterations: usize,
    pub learning_rates: LearningRates,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub render: RenderConfig,
    pub workers: Option<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            learning_rates: LearningRates::default(),
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-12,
            render: RenderConfig::default(),
            workers: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Validation("iterations must be at least 1".into()));
        }
        if self.learning_rates.per_slot().iter().any(|&lr| !(lr > 0.0 && lr.is_finite())) {
            return Err(Error::Validation("learning rates must be positive".into()));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2) && self.epsilon > 0.0) {
            return Err(Error::Validation("invalid Adam moments or epsilon".into()));
        }
        self.render.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub iteration: usize,
    pub loss: f64,
    pub psnr: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub splats: Vec<FlatGaussian>,
    /// Loss before each update, followed by the loss of the final state.
    pub history: Vec<LossRecord>,
}

impl FitResult {
    pub fn initial_psnr(&self) -> f64 {
        self.history.first().map_or(f64::NAN, |r| r.psnr)
    }

    pub fn final_psnr(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.psnr)
    }
}

pub fn write_loss_csv(history: &[LossRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(out, "iteration,loss,psnr").expect("writing to a Vec cannot fail");
    for r in history {
        writeln!(out, "{},{:e},{}", r.iteration, r.loss, r.psnr).expect("writing to a Vec cannot fail");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Splat-only renders through the same aggregation the fitter differentiates.
pub fn render_views(
    splats: &[FlatGaussian],
    cameras: &[Camera],
    config: &RenderConfig,
    workers: Option<usize>,
) -> Result<Vec<Image>> {
    config.validate()?;
    let scene = Scene::from_splats(splats.to_vec());
    let prepared = PreparedScene::new(&scene, &config.level);
    with_workers(workers, || {
        cameras
            .iter()
            .map(|cam| {
                let (w, h) = (cam.width as usize, cam.height as usize);
                let mut pixels = vec![DVec3::ZERO; w * h];
                pixels.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
                    for (x, px) in row.iter_mut().enumerate() {
                        *px = aggregate_color(&cam.ray(x as u32, y as u32), &prepared, config).color;
                    }
                });
                Image::from_pixels(cam.width, cam.height, pixels)
            })
            .collect()
    })
}

fn check_views(cameras: &[Camera], targets: &[Image]) -> Result<()> {
    if cameras.is_empty() {
        return Err(Error::Validation("at least one target view is required".into()));
    }
    if cameras.len() != targets.len() {
        return Err(Error::Contract(format!(
            "{} cameras but {} target images",
            cameras.len(),
            targets.len()
        )));
    }
    for (i, (c, t)) in cameras.iter().zip(targets).enumerate() {
        if (c.width, c.height) != (t.width(), t.height()) {
            return Err(Error::Contract(format!(
                "view {i}: camera is {}x{} but target is {}x{}",
                c.width,
                c.height,
                t.width(),
                t.height()
            )));
        }
    }
    Ok(())
}

/// Mean squared error over every view, pixel and channel, and its gradient.
pub fn loss_and_gradient(
    splats: &[FlatGaussian],
    cameras: &[Camera],
    targets: &[Image],
    config: &RenderConfig,
    workers: Option<usize>,
) -> Result<(f64, GradientBuffer)> {
    check_views(cameras, targets)?;
    let scene = Scene::from_splats(splats.to_vec());
    let prepared = PreparedScene::new(&scene, &config.level);
    let samples: usize = targets.iter().map(|t| t.pixels().len() * 3).sum();
    let norm = 1.0 / samples.max(1) as f64;
    let background = config.background;

    with_workers(workers, || {
        let mut sse = 0.0;
        let mut grads = GradientBuffer::zeros(splats.len());
        for (cam, target) in cameras.iter().zip(targets) {
            let (w, h) = (cam.width, cam.height);
            let rows_per_block = (h as usize).div_ceil(BLOCKS_PER_VIEW).max(1);
            let blocks: Vec<Result<(f64, GradientBuffer)>> = (0..h as usize)
                .step_by(rows_per_block)
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|start| {
                    let mut part_sse = 0.0;
                    let mut part = GradientBuffer::zeros(splats.len());
                    for y in start..(start + rows_per_block).min(h as usize) {
                        for x in 0..w {
                            let ray = cam.ray(x, y as u32);
                            let rec = aggregate_color(&ray, &prepared, config);
                            let diff = rec.color - target.get(x, y as u32);
                            part_sse += diff.length_squared();
                            backward_ray(&rec, &ray, splats, background, diff * (2.0 * norm), &mut part)?;
                        }
                    }
                    Ok((part_sse, part))
                })
                .collect();
            for block in blocks {
                let (s, g) = block?;
                sse += s;
                grads += &g;
            }
        }
        Ok((sse * norm, grads))
    })?
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

struct Adam {
    lr: [f64; PARAMS_PER_SPLAT],
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: i32,
    m: Vec<[f64; PARAMS_PER_SPLAT]>,
    v: Vec<[f64; PARAMS_PER_SPLAT]>,
}

impl Adam {
    fn new(config: &FitConfig, count: usize) -> Self {
        Self {
            lr: config.learning_rates.per_slot(),
            beta1: config.beta1,
            beta2: config.beta2,
            epsilon: config.epsilon,
            step: 0,
            m: vec![[0.0; PARAMS_PER_SPLAT]; count],
            v: vec![[0.0; PARAMS_PER_SPLAT]; count],
        }
    }

    /// Parameter deltas for one splat; call `advance` once per iteration first.
    fn delta(&mut self, splat: usize, g: &[f64; PARAMS_PER_SPLAT]) -> [f64; PARAMS_PER_SPLAT] {
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let (m, v) = (&mut self.m[splat], &mut self.v[splat]);
        std::array::from_fn(|k| {
            m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
            v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
            -self.lr[k] * (m[k] / c1) / ((v[k] / c2).sqrt() + self.epsilon)
        })
    }

    fn advance(&mut self) {
        self.step += 1;
    }
}

/// Apply deltas in the optimizer's parameterization. Untouched parameter
/// groups keep their exact values.
fn apply_delta(g: &mut FlatGaussian, d: &[f64; PARAMS_PER_SPLAT]) {
    let nonzero = |range: std::ops::Range<usize>| d[range].iter().any(|&v| v != 0.0);
    if nonzero(0..3) {
        g.color = (g.color + DVec3::new(d[0], d[1], d[2])).clamp(DVec3::ZERO, DVec3::ONE);
    }
    if d[3] != 0.0 {
        let p = g.opacity.clamp(OPACITY_LIMIT, 1.0 - OPACITY_LIMIT);
        g.opacity = sigmoid(logit(p) + d[3]).clamp(OPACITY_LIMIT, 1.0 - OPACITY_LIMIT);
    }
    if nonzero(4..7) {
        g.mean += DVec3::new(d[4], d[5], d[6]);
    }
    if nonzero(7..11) {
        let q = g.rotation;
        g.rotation = DQuat::from_xyzw(q.x + d[8], q.y + d[9], q.z + d[10], q.w + d[7]).normalize();
    }
    if d[11] != 0.0 {
        g.scales.y *= d[11].exp();
    }
    if d[12] != 0.0 {
        g.scales.z *= d[12].exp();
    }
}

/// Fit splat parameters to target views with Adam on the mean squared
/// error. The splat count is fixed; polygons are rebuilt every iteration.
pub fn fit(initial: &[FlatGaussian], targets: &[Image], cameras: &[Camera], config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    check_views(cameras, targets)?;
    if initial.is_empty() {
        return Err(Error::Validation("cannot fit an empty scene".into()));
    }
    let mut splats = initial.to_vec();
    let mut adam = Adam::new(config, splats.len());
    let mut history = Vec::with_capacity(config.iterations + 1);
    let mut initial_loss = None;

    for iteration in 0..config.iterations {
        let (loss, grads) = loss_and_gradient(&splats, cameras, targets, &config.render, config.workers)?;
        let first = *initial_loss.get_or_insert(loss);
        if loss > 10.0 * first {
            return Err(Error::Divergence {
                iteration,
                loss,
                initial: first,
            });
        }
        history.push(LossRecord {
            iteration,
            loss,
            psnr: psnr_from_mse(loss),
        });
        if iteration % 50 == 0 {
            log::info!("iteration {iteration}: loss {loss:.6e}, psnr {:.3} dB", psnr_from_mse(loss));
        }

        adam.advance();
        for (k, g) in splats.iter_mut().enumerate() {
            let mut grad = grads.get(k).to_array();
            grad[3] *= g.opacity * (1.0 - g.opacity);
            let delta = adam.delta(k, &grad);
            apply_delta(g, &delta);
        }
    }

    let (loss, _) = loss_and_gradient(&splats, cameras, targets, &config.render, config.workers)?;
    history.push(LossRecord {
        iteration: config.iterations,
        loss,
        psnr: psnr_from_mse(loss),
    });
    Ok(FitResult { splats, history })
}
