//! Grayscale heatmap rendering of trajectory snapshots.
//!
//! Each matrix entry becomes one square cell; lower values are darker. All
//! frames of one matrix share a single symmetric value range `[-v, v]` with
//! `v` the largest absolute entry across the selected snapshots, so the sign
//! boundary sits at mid-gray and frames are comparable across time.

use image::{GrayImage, Luma};
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::types::Trajectory;

/// Which matrix of a snapshot to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Appraisal,
    Opinion,
}

impl MatrixKind {
    pub fn label(&self) -> &'static str {
        match self {
            MatrixKind::Appraisal => "X",
            MatrixKind::Opinion => "Y",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RenderOptions {
    /// Side length in pixels of one matrix-entry cell.
    pub cell_size: u32,
    /// Pixel gap between frames in the filmstrip composite.
    pub gap: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            cell_size: 32,
            gap: 4,
        }
    }
}

fn to_gray(value: f64, vmax: f64) -> u8 {
    if vmax == 0.0 {
        return 128;
    }
    let norm = ((value + vmax) / (2.0 * vmax)).clamp(0.0, 1.0);
    (norm * 255.0).round() as u8
}

/// Renders one matrix against the symmetric range `[-vmax, vmax]`.
pub fn render_matrix(entries: &Array2<f64>, vmax: f64, cell_size: u32) -> GrayImage {
    let (rows, cols) = entries.dim();
    let mut img = GrayImage::new(cols as u32 * cell_size, rows as u32 * cell_size);
    for ((i, j), &v) in entries.indexed_iter() {
        let shade = Luma([to_gray(v, vmax)]);
        for dy in 0..cell_size {
            for dx in 0..cell_size {
                img.put_pixel(j as u32 * cell_size + dx, i as u32 * cell_size + dy, shade);
            }
        }
    }
    img
}

/// Default frame selection: initial, first step, midpoint, final.
pub fn default_frames(traj: &Trajectory) -> Vec<usize> {
    let final_t = traj.last().t;
    let mut frames = vec![0, 1, final_t / 2, final_t];
    frames.sort_unstable();
    frames.dedup();
    frames.retain(|&t| traj.snapshot_at(t).is_some());
    frames
}

fn frame_entries<'a>(
    traj: &'a Trajectory,
    kind: MatrixKind,
    t: usize,
) -> Result<&'a Array2<f64>> {
    let snap = traj
        .snapshot_at(t)
        .ok_or_else(|| Error::InvalidParameter(format!("no snapshot recorded at t = {t}")))?;
    match kind {
        MatrixKind::Opinion => Ok(snap.opinion.entries()),
        MatrixKind::Appraisal => snap
            .appraisal
            .as_ref()
            .map(|x| x.entries())
            .ok_or_else(|| {
                Error::InvalidParameter(format!("no appraisal matrix recorded at t = {t}"))
            }),
    }
}

/// Renders the selected snapshots of one matrix, sharing a global value
/// range. Returns `(t, image)` pairs in frame order.
pub fn render_frames(
    traj: &Trajectory,
    kind: MatrixKind,
    frames: &[usize],
    options: &RenderOptions,
) -> Result<Vec<(usize, GrayImage)>> {
    if frames.is_empty() {
        return Err(Error::InvalidParameter("no frames selected".into()));
    }
    let mut vmax = 0.0f64;
    for &t in frames {
        let entries = frame_entries(traj, kind, t)?;
        vmax = vmax.max(entries.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
    }
    frames
        .iter()
        .map(|&t| {
            let entries = frame_entries(traj, kind, t)?;
            Ok((t, render_matrix(entries, vmax, options.cell_size)))
        })
        .collect()
}

/// Concatenates frames left to right into one filmstrip image.
pub fn filmstrip(frames: &[(usize, GrayImage)], options: &RenderOptions) -> Result<GrayImage> {
    if frames.is_empty() {
        return Err(Error::InvalidParameter("no frames to compose".into()));
    }
    let height = frames.iter().map(|(_, f)| f.height()).max().unwrap();
    let width: u32 = frames.iter().map(|(_, f)| f.width()).sum::<u32>()
        + options.gap * (frames.len() as u32 - 1);
    let mut strip = GrayImage::from_pixel(width, height, Luma([255]));
    let mut x0 = 0;
    for (_, frame) in frames {
        for (x, y, px) in frame.enumerate_pixels() {
            strip.put_pixel(x0 + x, y, *px);
        }
        x0 += frame.width() + options.gap;
    }
    Ok(strip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, SimulationConfig};
    use crate::types::{OpinionMatrix, DEFAULT_ROW_TOLERANCE};

    fn two_camp_trajectory() -> Trajectory {
        let y0 = OpinionMatrix::from_rows(
            &[
                vec![1.0, 2.0, 5.0],
                vec![-1.0, -2.0, 5.0],
                vec![-1.0, -2.0, 5.0],
                vec![1.0, 2.0, 5.0],
            ],
            DEFAULT_ROW_TOLERANCE,
        )
        .unwrap();
        simulate(&y0, &SimulationConfig::default())
    }

    #[test]
    fn gray_mapping_endpoints_and_midpoint() {
        assert_eq!(to_gray(-2.0, 2.0), 0);
        assert_eq!(to_gray(0.0, 2.0), 128);
        assert_eq!(to_gray(2.0, 2.0), 255);
        assert_eq!(to_gray(0.0, 0.0), 128);
        assert_eq!(to_gray(5.0, 2.0), 255);
    }

    #[test]
    fn constant_matrix_renders_uniform() {
        let entries = Array2::from_elem((3, 3), 5.0);
        let img = render_matrix(&entries, 5.0, 4);
        assert_eq!((img.width(), img.height()), (12, 12));
        assert!(img.pixels().all(|p| p.0[0] == 255));
    }

    #[test]
    fn frames_share_value_range_and_are_deterministic() {
        let traj = two_camp_trajectory();
        let frames = default_frames(&traj);
        assert!(frames.contains(&0));
        assert!(frames.contains(&traj.last().t));
        let opts = RenderOptions::default();
        let a = render_frames(&traj, MatrixKind::Opinion, &frames, &opts).unwrap();
        let b = render_frames(&traj, MatrixKind::Opinion, &frames, &opts).unwrap();
        assert_eq!(a.len(), frames.len());
        for ((ta, ia), (tb, ib)) in a.iter().zip(&b) {
            assert_eq!(ta, tb);
            assert_eq!(ia.as_raw(), ib.as_raw());
        }
    }

    #[test]
    fn appraisal_frames_skip_t0() {
        let traj = two_camp_trajectory();
        assert!(render_frames(
            &traj,
            MatrixKind::Appraisal,
            &[0],
            &RenderOptions::default()
        )
        .is_err());
        assert!(render_frames(
            &traj,
            MatrixKind::Appraisal,
            &[1],
            &RenderOptions::default()
        )
        .is_ok());
    }

    #[test]
    fn filmstrip_dimensions() {
        let traj = two_camp_trajectory();
        let opts = RenderOptions {
            cell_size: 4,
            gap: 2,
        };
        let frames = render_frames(&traj, MatrixKind::Opinion, &[0, 1], &opts).unwrap();
        let strip = filmstrip(&frames, &opts).unwrap();
        let frame_w = 3 * 4; // m columns * cell_size
        let frame_h = 4 * 4;
        assert_eq!(strip.width(), 2 * frame_w as u32 + 2);
        assert_eq!(strip.height(), frame_h as u32);
        assert!(filmstrip(&[], &opts).is_err());
    }
}
