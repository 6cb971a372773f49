//! Interaction-frame electron trajectory over one modulation cycle.
//!
//! The microwave propagator `U(t)` is accumulated segment by segment
//! from the exact SU(2) factors `exp(-i H_seg dt)` with
//! `H_seg = Omega S_z + omega_1 (S_x cos phi + S_y sin phi)` during
//! pulses and `Omega S_z` during delays. The back-propagated operator
//! `U(t)^dag S_z U(t)` traces a unit Bloch trajectory whose components
//! `X(t), Y(t), Z(t)` are sampled on a uniform grid. Every sample is
//! computed exactly inside its segment, so refining the grid never moves
//! existing samples.

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

use crate::sequence::{validate, PulseElement, PulseSequence};

type Su2 = Matrix2<Complex64>;

const IM: Complex64 = Complex64::new(0.0, 1.0);

/// Sampled interaction-frame components of the back-propagated `S_z`.
#[derive(Debug, Clone)]
pub struct TrajectoryGrid {
    pub t_c: f64,
    pub n: usize,
    /// microwave offset used for the propagation, rad/s
    pub offset: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl TrajectoryGrid {
    pub fn time(&self, i: usize) -> f64 {
        self.t_c * i as f64 / self.n as f64
    }

    /// Worst deviation of `X^2 + Y^2 + Z^2` from 1 over the grid.
    pub fn unit_norm_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let r = self.x[i] * self.x[i] + self.y[i] * self.y[i] + self.z[i] * self.z[i];
            worst = worst.max((r - 1.0).abs());
        }
        worst
    }
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("grid granularity: N = {n} must be a multiple of 4")]
    GridNotMultipleOfFour { n: usize },
    #[error("grid granularity: N = {n} is below the minimum 1024")]
    GridTooCoarse { n: usize },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
}

/// Propagation parameters of one piecewise-constant segment.
#[derive(Debug, Clone, Copy)]
struct Segment {
    omega_1: f64,
    phase: f64,
    offset: f64,
    start: f64,
    duration: f64,
}

impl Segment {
    /// Exact `exp(-i H dt)` for this segment's Hamiltonian.
    fn propagator(&self, dt: f64) -> Su2 {
        su2_rotation(self.omega_1 * self.phase.cos(), self.omega_1 * self.phase.sin(), self.offset, dt)
    }
}

/// `exp(-i (vx Sx + vy Sy + vz Sz) t)` in closed form.
fn su2_rotation(vx: f64, vy: f64, vz: f64, t: f64) -> Su2 {
    let v = (vx * vx + vy * vy + vz * vz).sqrt();
    if v == 0.0 {
        return Su2::identity();
    }
    let half = 0.5 * v * t;
    let (s, c) = half.sin_cos();
    let f = s / v;
    // cos I - i sin (v̂·sigma), with S = sigma/2 absorbed into half
    Su2::new(
        Complex64::new(c, -f * vz),
        Complex64::new(-f * vy, -f * vx),
        Complex64::new(f * vy, -f * vx),
        Complex64::new(c, f * vz),
    )
}

fn bloch_of(u: &Su2) -> (f64, f64, f64) {
    // P = U^dag sigma_z U; X = Re P10, Y = Im P10, Z = P00 (real)
    let a = u[(0, 0)];
    let b = u[(0, 1)];
    let c = u[(1, 0)];
    let d = u[(1, 1)];
    // sigma_z U = [[a, b], [-c, -d]]
    // P = U^dag (sigma_z U)
    let p00 = (a.conj() * a - c.conj() * c).re;
    let p10 = b.conj() * a - d.conj() * c;
    (2.0 * p10.re, 2.0 * p10.im, p00 - (1.0 - p00))
}

fn segments_of(seq: &PulseSequence, offset: f64) -> Vec<Segment> {
    let mut t = 0.0;
    let mut out = Vec::with_capacity(seq.elements.len());
    for el in &seq.elements {
        let dur = el.duration();
        match el {
            PulseElement::Pulse { .. } => out.push(Segment {
                omega_1: seq.omega_1,
                phase: el.phase_rad(),
                offset,
                start: t,
                duration: dur,
            }),
            PulseElement::Delay { .. } => out.push(Segment {
                omega_1: 0.0,
                phase: 0.0,
                offset,
                start: t,
                duration: dur,
            }),
        }
        t += dur;
    }
    out
}

/// Sample `U(t)^dag S_z U(t)` on a uniform `N`-point grid over one cycle.
///
/// `offset` is the microwave offset `Omega`; the symmetry analyses of
/// the Floquet layer use `offset = 0`.
pub fn interaction_frame_trajectory(
    seq: &PulseSequence,
    offset: f64,
    n: usize,
) -> Result<TrajectoryGrid, TrajectoryError> {
    if n % 4 != 0 {
        return Err(TrajectoryError::GridNotMultipleOfFour { n });
    }
    if n < 1024 {
        return Err(TrajectoryError::GridTooCoarse { n });
    }
    let diags = validate(seq);
    if !diags.is_empty() {
        return Err(TrajectoryError::InvalidSequence(
            diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "),
        ));
    }

    let segments = segments_of(seq, offset);
    let t_c = seq.t_c;
    let dt = t_c / n as f64;

    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);

    // cumulative propagator at the start of the current segment
    let mut u_boundary = Su2::identity();
    let mut seg_idx = 0usize;

    for i in 0..n {
        let t = i as f64 * dt;
        // advance across any segment boundaries at or before t
        while seg_idx < segments.len() {
            let seg = &segments[seg_idx];
            let end = seg.start + seg.duration;
            if t < end - 1e-18 * t_c || seg_idx + 1 == segments.len() {
                break;
            }
            u_boundary = seg.propagator(seg.duration) * u_boundary;
            seg_idx += 1;
        }
        let seg = &segments[seg_idx];
        let u = seg.propagator(t - seg.start) * u_boundary;
        let (xi, yi, zi) = bloch_of(&u);
        x.push(xi);
        y.push(yi);
        z.push(zi);
    }

    Ok(TrajectoryGrid { t_c, n, offset, x, y, z })
}

/// `X(t + sign * T_c/4)` as an exact cyclic permutation of the grid.
pub fn quarter_shift(traj: &TrajectoryGrid, sign: i32) -> Vec<f64> {
    cyclic_shift(&traj.x, sign * (traj.n as i32 / 4))
}

/// `X(T_c - t)`: sample `i` maps to sample `(N - i) mod N`.
pub fn time_reverse(traj: &TrajectoryGrid) -> Vec<f64> {
    reversed(&traj.x)
}

/// Cyclic shift by `shift` samples: `out[i] = data[(i + shift) mod N]`.
pub fn cyclic_shift(data: &[f64], shift: i32) -> Vec<f64> {
    let n = data.len() as i32;
    (0..n).map(|i| data[(i + shift).rem_euclid(n) as usize]).collect()
}

/// Time reversal on the periodic grid: `out[i] = data[(N - i) mod N]`.
pub fn reversed(data: &[f64]) -> Vec<f64> {
    let n = data.len();
    (0..n).map(|i| data[(n - i) % n]).collect()
}
