//! Pulse-sequence data model, built-in presets and the text file format.
//!
//! A [`PulseSequence`] describes one modulation cycle of period `T_c`:
//! an ordered list of microwave pulses (flip angle + phase at fixed
//! nutation frequency `omega_1`) and free-precession delays. The cycle
//! frequency is locked to the nuclear Larmor frequency through the
//! resonance condition `omega_0n = k * omega_c`, and pulse finiteness is
//! tracked by the dimensionless ratio `f = omega_1 / (4 omega_c)`: at
//! `f = 1` the pulses fill the entire cycle, for large `f` the sequence
//! approaches the instantaneous-pulse limit.
//!
//! The PulsePol-family presets are one full cycle of four palindromic
//! composite blocks `(pi/2)_phi - tau - (pi)_phi - tau - (pi/2)_phi`
//! whose phase `phi` advances by 90 degrees from block to block. The
//! quadrature-symmetric variant keeps that winding intact; the standard
//! variant inverts the sense of the central inversion pulse (+X -> -X),
//! which leaves every pulse endpoint and the whole X-trajectory
//! untouched but reverses the path swept during that one pulse.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

/// Preset family tag. `Custom` covers hand-written sequence files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    PulsePol,
    QPulsePol,
    Novel,
    Custom,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::PulsePol => "pulsepol",
            Variant::QPulsePol => "qpulsepol",
            Variant::Novel => "novel",
            Variant::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pulsepol" => Some(Variant::PulsePol),
            "qpulsepol" => Some(Variant::QPulsePol),
            "novel" => Some(Variant::Novel),
            "custom" => Some(Variant::Custom),
            _ => None,
        }
    }
}

/// One element of a sequence. Angles and phases keep their file-format
/// degree values so that parse/serialize round-trips are bit-exact;
/// radian accessors are provided for all numerical work.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseElement {
    Pulse {
        angle_deg: f64,
        phase_deg: f64,
        /// angle / omega_1, seconds
        duration_s: f64,
    },
    Delay {
        /// fraction of the total free-precession time in the cycle
        weight: f64,
        duration_s: f64,
    },
}

impl PulseElement {
    pub fn duration(&self) -> f64 {
        match self {
            PulseElement::Pulse { duration_s, .. } => *duration_s,
            PulseElement::Delay { duration_s, .. } => *duration_s,
        }
    }

    pub fn is_pulse(&self) -> bool {
        matches!(self, PulseElement::Pulse { .. })
    }

    pub fn angle_rad(&self) -> f64 {
        match self {
            PulseElement::Pulse { angle_deg, .. } => angle_deg.to_radians(),
            PulseElement::Delay { .. } => 0.0,
        }
    }

    pub fn phase_rad(&self) -> f64 {
        match self {
            PulseElement::Pulse { phase_deg, .. } => phase_deg.to_radians(),
            PulseElement::Delay { .. } => 0.0,
        }
    }
}

/// One modulation cycle of a periodic microwave sequence.
///
/// All frequencies are angular (rad/s). `k_res` is the resonance
/// harmonic locking the cycle to the nuclear Larmor frequency
/// (`omega_0n = k_res * omega_c`); it is 0 for sequences such as the
/// spin-lock preset that are not harmonic-locked.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub name: String,
    pub variant: Variant,
    pub omega_1: f64,
    pub omega_0n: f64,
    pub k_res: u32,
    pub f: f64,
    pub t_c: f64,
    pub omega_c: f64,
    /// ideal free-precession delay unit: total free time / number of delays
    pub tau: f64,
    pub elements: Vec<PulseElement>,
}

#[derive(Debug, Error)]
pub enum SequenceError {
    #[error("line {line}, col {col}: {detail}")]
    Syntax { line: usize, col: usize, detail: String },
    #[error("line {line}: unknown element kind `{kind}`")]
    UnknownElementKind { line: usize, kind: String },
    #[error("line {line}: negative duration ({what})")]
    NegativeDuration { line: usize, what: String },
    #[error("cycle underfilled: delay weights sum to {sum}, expected 1")]
    CycleUnderfilled { sum: f64 },
    #[error("cycle overfilled: delay weights sum to {sum}, expected 1")]
    CycleOverfilled { sum: f64 },
    #[error("pulses overflow the cycle: f = {f} < 1")]
    PulseOverflow { f: f64 },
    #[error("{what} must be positive")]
    NonPositive { what: String },
    #[error("harmonic k must be odd and positive, got {k}")]
    BadHarmonic { k: i64 },
    #[error("missing header key `{key}`")]
    MissingHeader { key: String },
    #[error("exactly one of `f` and `omega_1_hz` must be given")]
    PowerHeaderConflict,
}

/// Composite-block phases of one PulsePol cycle, in degrees. Block `j`
/// is `(pi/2)_phi - tau - (pi)_phi - tau - (pi/2)_phi` and `phi` winds by
/// +90 degrees per block, which is what enforces the quadrature relation
/// between the X and Y trajectory components for every pulse width.
const BLOCK_PHASES_DEG: [f64; 4] = [270.0, 0.0, 90.0, 180.0];

/// Index of the block whose inversion pulse is the +X "central" pulse;
/// the standard PulsePol variant carries it at -X instead.
const CENTRAL_BLOCK: usize = 1;

/// Build one PulsePol or Q-PulsePol cycle.
///
/// `omega_0n` is the nuclear Larmor frequency (rad/s), `k` the resonance
/// harmonic, `f >= 1` the finiteness factor. The cycle contains eight
/// pi/2 pulses and four pi pulses (total rotation 8 pi); the delay slots
/// share the remaining `T_c (1 - 1/f)` evenly.
pub fn build_pulsepol(
    omega_0n: f64,
    k: u32,
    f: f64,
    variant: Variant,
) -> Result<PulseSequence, SequenceError> {
    if !(omega_0n > 0.0) {
        return Err(SequenceError::NonPositive { what: "omega_0n".into() });
    }
    if k == 0 || k % 2 == 0 {
        return Err(SequenceError::BadHarmonic { k: k as i64 });
    }
    if !(f > 0.0) {
        return Err(SequenceError::NonPositive { what: "f".into() });
    }
    if f < 1.0 {
        return Err(SequenceError::PulseOverflow { f });
    }
    let omega_c = omega_0n / k as f64;
    let t_c = 2.0 * PI / omega_c;
    let omega_1 = 4.0 * f * omega_c;

    let t_half = (PI / 2.0) / omega_1;
    let t_pi = PI / omega_1;
    let free = t_c - 8.0 * t_half - 4.0 * t_pi;
    // uniform ideal weights: each of the 8 slots takes 1/8 of the free time
    let weight = 0.125;
    let delay = free * weight;

    let mut elements = Vec::with_capacity(20);
    for (j, &phi) in BLOCK_PHASES_DEG.iter().enumerate() {
        let mut pi_phase = phi;
        if variant == Variant::PulsePol && j == CENTRAL_BLOCK {
            pi_phase = (phi + 180.0) % 360.0;
        }
        elements.push(PulseElement::Pulse {
            angle_deg: 90.0,
            phase_deg: phi,
            duration_s: t_half,
        });
        elements.push(PulseElement::Delay { weight, duration_s: delay });
        elements.push(PulseElement::Pulse {
            angle_deg: 180.0,
            phase_deg: pi_phase,
            duration_s: t_pi,
        });
        elements.push(PulseElement::Delay { weight, duration_s: delay });
        elements.push(PulseElement::Pulse {
            angle_deg: 90.0,
            phase_deg: phi,
            duration_s: t_half,
        });
    }

    let name = format!("{}-k{}-f{}", variant.as_str(), k, f);
    Ok(PulseSequence {
        name,
        variant,
        omega_1,
        omega_0n,
        k_res: k,
        f,
        t_c,
        omega_c,
        tau: free / 8.0,
        elements,
    })
}

/// Build a NOVEL cycle: a pi/2 flip followed by a spin lock at the
/// Hartmann-Hahn matching power `omega_1 = omega_0n`, phase-shifted by
/// 90 degrees so the lock axis coincides with the flipped spin.
pub fn build_novel(omega_0n: f64, lock_duration: f64) -> Result<PulseSequence, SequenceError> {
    if !(omega_0n > 0.0) {
        return Err(SequenceError::NonPositive { what: "omega_0n".into() });
    }
    if lock_duration < 0.0 {
        return Err(SequenceError::NegativeDuration { line: 0, what: "lock_duration".into() });
    }
    let omega_1 = omega_0n;
    let t_flip = (PI / 2.0) / omega_1;
    let mut elements = vec![PulseElement::Pulse {
        angle_deg: 90.0,
        phase_deg: 270.0,
        duration_s: t_flip,
    }];
    if lock_duration > 0.0 {
        let lock_angle_deg = (omega_1 * lock_duration).to_degrees();
        elements.push(PulseElement::Pulse {
            angle_deg: lock_angle_deg,
            phase_deg: 0.0,
            duration_s: lock_angle_deg.to_radians() / omega_1,
        });
    }
    let t_c = elements.iter().map(|e| e.duration()).sum::<f64>();
    let omega_c = 2.0 * PI / t_c;
    Ok(PulseSequence {
        name: "novel".into(),
        variant: Variant::Novel,
        omega_1,
        omega_0n,
        k_res: 0,
        f: omega_1 / (4.0 * omega_c),
        t_c,
        omega_c,
        tau: 0.0,
        elements,
    })
}

/// One validation finding from [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub invariant: &'static str,
    pub detail: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(out, "{}: {}", self.invariant, self.detail)
    }
}

/// Check every structural invariant of a sequence; an empty list means
/// the sequence is consistent.
pub fn validate(seq: &PulseSequence) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);

    if !(seq.t_c > 0.0) {
        diags.push(Diagnostic {
            invariant: "positive cycle time",
            detail: format!("T_c = {}", seq.t_c),
        });
        return diags;
    }
    if rel(seq.omega_c, 2.0 * PI / seq.t_c) > 1e-12 {
        diags.push(Diagnostic {
            invariant: "cycle frequency",
            detail: "omega_c != 2 pi / T_c".into(),
        });
    }
    if seq.k_res > 0 && rel(seq.omega_0n, seq.k_res as f64 * seq.omega_c) > 1e-9 {
        diags.push(Diagnostic {
            invariant: "resonance condition violated",
            detail: format!(
                "omega_0n = {:.6e} but k * omega_c = {:.6e}",
                seq.omega_0n,
                seq.k_res as f64 * seq.omega_c
            ),
        });
    }
    if rel(seq.f, seq.omega_1 / (4.0 * seq.omega_c)) > 1e-9 {
        diags.push(Diagnostic {
            invariant: "finiteness mismatch",
            detail: format!(
                "stored f = {} but omega_1/(4 omega_c) = {}",
                seq.f,
                seq.omega_1 / (4.0 * seq.omega_c)
            ),
        });
    }
    let mut total = 0.0;
    for (idx, el) in seq.elements.iter().enumerate() {
        if el.duration() < 0.0 {
            diags.push(Diagnostic {
                invariant: "negative duration",
                detail: format!("element {idx}"),
            });
        }
        if let PulseElement::Pulse { duration_s, .. } = el {
            let want = el.angle_rad() / seq.omega_1;
            if (duration_s - want).abs() > 1e-12 * seq.t_c {
                diags.push(Diagnostic {
                    invariant: "pulse duration",
                    detail: format!("element {idx}: duration != flip_angle / omega_1"),
                });
            }
        }
        total += el.duration();
    }
    if (total - seq.t_c).abs() > 1e-12 * seq.t_c {
        diags.push(Diagnostic {
            invariant: "cycle fill",
            detail: format!("element durations sum to {:.6e}, T_c = {:.6e}", total, seq.t_c),
        });
    }
    diags
}

/// Serialize a sequence in the text file format. Identical sequences
/// always produce identical bytes.
pub fn serialize_sequence(seq: &PulseSequence) -> String {
    let mut out = String::new();
    out.push_str(&format!("name {}\n", seq.name));
    out.push_str(&format!("omega_0n_hz {}\n", seq.omega_0n / (2.0 * PI)));
    out.push_str(&format!("k {}\n", seq.k_res));
    if seq.k_res > 0 {
        out.push_str(&format!("f {}\n", seq.f));
    } else {
        out.push_str(&format!("omega_1_hz {}\n", seq.omega_1 / (2.0 * PI)));
    }
    out.push_str(&format!("variant {}\n\n", seq.variant.as_str()));
    for el in &seq.elements {
        match el {
            PulseElement::Pulse { angle_deg, phase_deg, .. } => {
                out.push_str(&format!("pulse angle_deg={} phase_deg={}\n", angle_deg, phase_deg));
            }
            PulseElement::Delay { weight, .. } => {
                out.push_str(&format!("delay weight={}\n", weight));
            }
        }
    }
    out
}

fn parse_header_f64(value: &str, line: usize, col: usize) -> Result<f64, SequenceError> {
    value.parse::<f64>().map_err(|_| SequenceError::Syntax {
        line,
        col,
        detail: format!("expected a number, got `{value}`"),
    })
}

fn parse_kv(token: &str, key: &str, line: usize, col: usize) -> Result<f64, SequenceError> {
    let (k, v) = token.split_once('=').ok_or_else(|| SequenceError::Syntax {
        line,
        col,
        detail: format!("expected `{key}=<value>`, got `{token}`"),
    })?;
    if k != key {
        return Err(SequenceError::Syntax {
            line,
            col,
            detail: format!("expected key `{key}`, got `{k}`"),
        });
    }
    v.parse::<f64>().map_err(|_| SequenceError::Syntax {
        line,
        col,
        detail: format!("`{key}` is not a number: `{v}`"),
    })
}

/// Parse a sequence document. All invariants are validated; the returned
/// sequence round-trips bit-stably through [`serialize_sequence`].
pub fn parse_sequence(text: &str) -> Result<PulseSequence, SequenceError> {
    let mut name = None;
    let mut omega_0n_hz = None;
    let mut k: Option<i64> = None;
    let mut f = None;
    let mut omega_1_hz = None;
    let mut variant = Variant::Custom;
    // raw body records: (line, col, kind, values)
    enum Record {
        Pulse { angle_deg: f64, phase_deg: f64, line: usize },
        Delay { weight: f64, line: usize },
    }
    let mut records = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if stripped.trim().is_empty() {
            continue;
        }
        let col = stripped.len() - stripped.trim_start().len() + 1;
        let mut tokens = stripped.split_whitespace();
        let head = tokens.next().expect("non-empty line has a token");
        match head {
            "name" => {
                name = Some(tokens.collect::<Vec<_>>().join(" "));
            }
            "omega_0n_hz" => {
                let v = tokens.next().ok_or_else(|| SequenceError::Syntax {
                    line,
                    col,
                    detail: "omega_0n_hz needs a value".into(),
                })?;
                omega_0n_hz = Some(parse_header_f64(v, line, col)?);
            }
            "k" => {
                let v = tokens.next().ok_or_else(|| SequenceError::Syntax {
                    line,
                    col,
                    detail: "k needs a value".into(),
                })?;
                k = Some(v.parse::<i64>().map_err(|_| SequenceError::Syntax {
                    line,
                    col,
                    detail: format!("k must be an integer, got `{v}`"),
                })?);
            }
            "f" => {
                let v = tokens.next().ok_or_else(|| SequenceError::Syntax {
                    line,
                    col,
                    detail: "f needs a value".into(),
                })?;
                f = Some(parse_header_f64(v, line, col)?);
            }
            "omega_1_hz" => {
                let v = tokens.next().ok_or_else(|| SequenceError::Syntax {
                    line,
                    col,
                    detail: "omega_1_hz needs a value".into(),
                })?;
                omega_1_hz = Some(parse_header_f64(v, line, col)?);
            }
            "variant" => {
                let v = tokens.next().ok_or_else(|| SequenceError::Syntax {
                    line,
                    col,
                    detail: "variant needs a value".into(),
                })?;
                variant = Variant::parse(v).ok_or_else(|| SequenceError::Syntax {
                    line,
                    col,
                    detail: format!("unknown variant `{v}`"),
                })?;
            }
            "pulse" => {
                let a = tokens.next().ok_or_else(|| SequenceError::Syntax {
                    line,
                    col,
                    detail: "pulse needs `angle_deg=` and `phase_deg=`".into(),
                })?;
                let p = tokens.next().ok_or_else(|| SequenceError::Syntax {
                    line,
                    col,
                    detail: "pulse needs `phase_deg=`".into(),
                })?;
                let angle_deg = parse_kv(a, "angle_deg", line, col)?;
                let phase_deg = parse_kv(p, "phase_deg", line, col)?;
                records.push(Record::Pulse { angle_deg, phase_deg, line });
            }
            "delay" => {
                let w = tokens.next().ok_or_else(|| SequenceError::Syntax {
                    line,
                    col,
                    detail: "delay needs `weight=`".into(),
                })?;
                let weight = parse_kv(w, "weight", line, col)?;
                records.push(Record::Delay { weight, line });
            }
            other => {
                return Err(SequenceError::UnknownElementKind {
                    line,
                    kind: other.to_string(),
                })
            }
        }
    }

    let name = name.ok_or_else(|| SequenceError::MissingHeader { key: "name".into() })?;
    let omega_0n_hz = omega_0n_hz
        .ok_or_else(|| SequenceError::MissingHeader { key: "omega_0n_hz".into() })?;
    let k = k.ok_or_else(|| SequenceError::MissingHeader { key: "k".into() })?;
    if !(omega_0n_hz > 0.0) {
        return Err(SequenceError::NonPositive { what: "omega_0n_hz".into() });
    }
    if k < 0 {
        return Err(SequenceError::BadHarmonic { k });
    }
    let omega_0n = 2.0 * PI * omega_0n_hz;

    // The resonance condition pins omega_c for harmonic-locked sequences;
    // free-running ones (k = 0) get their period from the element list.
    let (omega_1, f_val, t_c, omega_c);
    match (f, omega_1_hz) {
        (Some(_), Some(_)) | (None, None) => return Err(SequenceError::PowerHeaderConflict),
        (Some(fv), None) => {
            if k == 0 {
                return Err(SequenceError::Syntax {
                    line: 0,
                    col: 0,
                    detail: "header f requires a positive harmonic k".into(),
                });
            }
            omega_c = omega_0n / k as f64;
            t_c = 2.0 * PI / omega_c;
            omega_1 = 4.0 * fv * omega_c;
            f_val = fv;
        }
        (None, Some(w1hz)) => {
            if !(w1hz > 0.0) {
                return Err(SequenceError::NonPositive { what: "omega_1_hz".into() });
            }
            omega_1 = 2.0 * PI * w1hz;
            if k > 0 {
                omega_c = omega_0n / k as f64;
                t_c = 2.0 * PI / omega_c;
            } else {
                // period = total pulse time; no delays allowed without k
                let total_angle: f64 = records
                    .iter()
                    .map(|r| match r {
                        Record::Pulse { angle_deg, .. } => angle_deg.to_radians(),
                        Record::Delay { .. } => 0.0,
                    })
                    .sum();
                t_c = total_angle / omega_1;
                omega_c = 2.0 * PI / t_c;
            }
            f_val = omega_1 / (4.0 * omega_c);
        }
    }

    // resolve elements
    let total_pulse_angle: f64 = records
        .iter()
        .map(|r| match r {
            Record::Pulse { angle_deg, .. } => angle_deg.to_radians(),
            Record::Delay { .. } => 0.0,
        })
        .sum();
    let total_pulse_time = total_pulse_angle / omega_1;
    let free = t_c - total_pulse_time;
    if free < -1e-12 * t_c {
        return Err(SequenceError::PulseOverflow { f: f_val });
    }
    let free = free.max(0.0);
    let n_delays = records.iter().filter(|r| matches!(r, Record::Delay { .. })).count();
    let mut weight_sum = 0.0;
    for r in &records {
        match r {
            Record::Pulse { angle_deg, line, .. } => {
                if *angle_deg < 0.0 {
                    return Err(SequenceError::NegativeDuration {
                        line: *line,
                        what: "pulse angle".into(),
                    });
                }
            }
            Record::Delay { weight, line } => {
                if *weight < 0.0 {
                    return Err(SequenceError::NegativeDuration {
                        line: *line,
                        what: "delay weight".into(),
                    });
                }
                weight_sum += weight;
            }
        }
    }
    if n_delays > 0 && free > 1e-12 * t_c {
        if weight_sum < 1.0 - 1e-9 {
            return Err(SequenceError::CycleUnderfilled { sum: weight_sum });
        }
        if weight_sum > 1.0 + 1e-9 {
            return Err(SequenceError::CycleOverfilled { sum: weight_sum });
        }
    }

    let elements: Vec<PulseElement> = records
        .into_iter()
        .map(|r| match r {
            Record::Pulse { angle_deg, phase_deg, .. } => PulseElement::Pulse {
                angle_deg,
                phase_deg: phase_deg.rem_euclid(360.0),
                duration_s: angle_deg.to_radians() / omega_1,
            },
            Record::Delay { weight, .. } => {
                PulseElement::Delay { weight, duration_s: weight * free }
            }
        })
        .collect();

    let seq = PulseSequence {
        name,
        variant,
        omega_1,
        omega_0n,
        k_res: k as u32,
        f: f_val,
        t_c,
        omega_c,
        tau: if n_delays > 0 { free / n_delays as f64 } else { 0.0 },
        elements,
    };
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finiteness_from_paper_operating_points() {
        // 50 MHz power at a 2 MHz Larmor frequency, k = 3
        let seq = build_pulsepol(2.0 * PI * 2e6, 3, 18.75, Variant::PulsePol).unwrap();
        assert!((seq.omega_1 / (2.0 * PI) - 50e6).abs() < 1e-3);
        // 38 MHz and 21 MHz at 15 MHz
        let w0 = 2.0 * PI * 15e6;
        let f38 = (2.0 * PI * 38e6) / (4.0 * (w0 / 3.0));
        let f21 = (2.0 * PI * 21e6) / (4.0 * (w0 / 3.0));
        assert!((f38 - 1.9).abs() < 1e-12);
        assert!((f21 - 1.05).abs() < 1e-12);
    }

    #[test]
    fn f_equal_one_fills_cycle() {
        let seq = build_pulsepol(2.0 * PI * 15e6, 3, 1.0, Variant::QPulsePol).unwrap();
        // omega_1 = (4/3) omega_0n
        assert!((seq.omega_1 - 4.0 / 3.0 * seq.omega_0n).abs() < 1e-3);
        for el in &seq.elements {
            if let PulseElement::Delay { duration_s, .. } = el {
                assert!(duration_s.abs() < 1e-12 * seq.t_c);
            }
        }
        let total: f64 = seq.elements.iter().map(|e| e.duration()).sum();
        assert!((total - seq.t_c).abs() < 1e-12 * seq.t_c);
    }

    #[test]
    fn cycle_fills_t_c_for_various_f() {
        for &f in &[1.0, 1.05, 1.9, 5.0, 20.0, 100.0] {
            for &v in &[Variant::PulsePol, Variant::QPulsePol] {
                let seq = build_pulsepol(2.0 * PI * 15e6, 3, f, v).unwrap();
                let total: f64 = seq.elements.iter().map(|e| e.duration()).sum();
                assert!((total - seq.t_c).abs() < 1e-12 * seq.t_c, "f={f}");
                let rot: f64 = seq.elements.iter().map(|e| e.angle_rad()).sum();
                assert!((rot - 8.0 * PI).abs() < 1e-12);
                assert!(validate(&seq).is_empty(), "f={f}: {:?}", validate(&seq));
            }
        }
    }

    #[test]
    fn variants_differ_in_exactly_one_phase_by_pi() {
        let p = build_pulsepol(2.0 * PI * 15e6, 3, 1.9, Variant::PulsePol).unwrap();
        let q = build_pulsepol(2.0 * PI * 15e6, 3, 1.9, Variant::QPulsePol).unwrap();
        assert_eq!(p.elements.len(), q.elements.len());
        let mut diffs = 0;
        for (a, b) in p.elements.iter().zip(&q.elements) {
            match (a, b) {
                (
                    PulseElement::Pulse { angle_deg: aa, phase_deg: pa, .. },
                    PulseElement::Pulse { angle_deg: ab, phase_deg: pb, .. },
                ) => {
                    assert_eq!(aa, ab);
                    if pa != pb {
                        diffs += 1;
                        let d = (pa - pb).rem_euclid(360.0);
                        assert!((d - 180.0).abs() < 1e-12);
                    }
                }
                (a, b) => assert_eq!(a, b),
            }
        }
        assert_eq!(diffs, 1);
    }

    #[test]
    fn rejects_f_below_one() {
        assert!(matches!(
            build_pulsepol(2.0 * PI * 15e6, 3, 0.5, Variant::PulsePol),
            Err(SequenceError::PulseOverflow { .. })
        ));
    }

    #[test]
    fn rejects_even_harmonic() {
        assert!(matches!(
            build_pulsepol(2.0 * PI * 15e6, 2, 2.0, Variant::PulsePol),
            Err(SequenceError::BadHarmonic { .. })
        ));
    }

    #[test]
    fn novel_matches_hartmann_hahn() {
        let seq = build_novel(2.0 * PI * 15e6, 20e-6).unwrap();
        assert!((seq.omega_1 - seq.omega_0n).abs() < 1e-6);
        assert_eq!(seq.elements.len(), 2);
    }

    #[test]
    fn novel_zero_lock_is_valid() {
        let seq = build_novel(2.0 * PI * 15e6, 0.0).unwrap();
        assert_eq!(seq.elements.len(), 1);
        let total: f64 = seq.elements.iter().map(|e| e.duration()).sum();
        assert!((total - seq.t_c).abs() < 1e-18);
    }

    #[test]
    fn preset_roundtrip_is_identical() {
        for &v in &[Variant::PulsePol, Variant::QPulsePol] {
            let seq = build_pulsepol(2.0 * PI * 15e6, 3, 1.9, v).unwrap();
            let text = serialize_sequence(&seq);
            let back = parse_sequence(&text).unwrap();
            assert_eq!(seq, back);
            // and the serializer is a fixed point
            assert_eq!(text, serialize_sequence(&back));
        }
        let seq = build_novel(2.0 * PI * 15e6, 10e-6).unwrap();
        let text = serialize_sequence(&seq);
        let back = parse_sequence(&text).unwrap();
        assert_eq!(serialize_sequence(&back), text);
    }

    #[test]
    fn parse_rejects_negative_weight() {
        let text = "name t\nomega_0n_hz 2e6\nk 3\nf 2\npulse angle_deg=90 phase_deg=0\ndelay weight=-1\n";
        match parse_sequence(text) {
            Err(SequenceError::NegativeDuration { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected negative duration, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_underfilled_cycle() {
        let text = "name t\nomega_0n_hz 2e6\nk 3\nf 2\npulse angle_deg=90 phase_deg=0\ndelay weight=0.9\n";
        assert!(matches!(parse_sequence(text), Err(SequenceError::CycleUnderfilled { .. })));
    }

    #[test]
    fn parse_rejects_unknown_kind() {
        let text = "name t\nomega_0n_hz 2e6\nk 3\nf 2\nchirp rate=1\n";
        match parse_sequence(text) {
            Err(SequenceError::UnknownElementKind { line, kind }) => {
                assert_eq!(line, 5);
                assert_eq!(kind, "chirp");
            }
            other => panic!("expected unknown element kind, got {other:?}"),
        }
    }

    #[test]
    fn parse_reports_line_and_column() {
        let text = "name t\nomega_0n_hz 2e6\nk 3\nf 2\n  pulse angle_deg=bad phase_deg=0\n";
        match parse_sequence(text) {
            Err(SequenceError::Syntax { line, col, .. }) => {
                assert_eq!(line, 5);
                assert_eq!(col, 3);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn parse_requires_exactly_one_power_header() {
        let both = "name t\nomega_0n_hz 2e6\nk 3\nf 2\nomega_1_hz 5e7\npulse angle_deg=90 phase_deg=0\n";
        assert!(matches!(parse_sequence(both), Err(SequenceError::PowerHeaderConflict)));
        let neither = "name t\nomega_0n_hz 2e6\nk 3\npulse angle_deg=90 phase_deg=0\n";
        assert!(matches!(parse_sequence(neither), Err(SequenceError::PowerHeaderConflict)));
    }

    #[test]
    fn validate_flags_hand_edited_cycle() {
        let mut seq = build_pulsepol(2.0 * PI * 15e6, 3, 2.0, Variant::QPulsePol).unwrap();
        seq.t_c *= 1.01;
        let diags = validate(&seq);
        assert!(diags.iter().any(|d| d.invariant.contains("cycle frequency")
            || d.invariant.contains("resonance")));
    }

    #[test]
    fn validate_flags_finiteness_mismatch() {
        let mut seq = build_pulsepol(2.0 * PI * 15e6, 3, 2.0, Variant::QPulsePol).unwrap();
        seq.f = 3.0;
        let diags = validate(&seq);
        assert!(diags.iter().any(|d| d.invariant == "finiteness mismatch"));
    }
}
