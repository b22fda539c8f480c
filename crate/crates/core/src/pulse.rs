//! GaussianSquare pulse model: closed-form areas, angle-proportional area
//! scaling, and area-preserving duration stretches.
//!
//! All horizontal quantities (sigma, width, risefall, duration, schedule
//! times) are measured in device sample ticks (dt). A pulse has a flat top of
//! `width` ticks and Gaussian flanks of `risefall` ticks on each side, so its
//! nominal duration is `width + 2 * risefall`. Amplitude is a magnitude in
//! `[0, 1]` with a separate carrier phase; a sign flip of the drive is a
//! phase shift of pi.
//!
//! Two area notions appear:
//!
//! * the closed form `|A| * (w + sqrt(2 pi) * sigma * erf(rf / (sqrt(2) sigma)))`,
//!   which treats the flanks as untruncated Gaussians, and
//! * the numerically integrated area of the *lifted* envelope, which is the
//!   waveform hardware actually plays: the raw envelope is shifted and
//!   rescaled so it starts from zero at the pulse edge.
//!
//! Stretching preserves the second (physical) notion exactly and quantizes
//! the new duration to the 16-tick hardware granularity.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::quantum::Angle;

/// Hardware waveform granularity: emitted durations are multiples of this.
pub const DURATION_GRANULARITY: f64 = 16.0;

/// Quadrature step (in dt) used for lifted-envelope integrals.
const QUADRATURE_STEP: f64 = 0.25;

/// A GaussianSquare envelope. See the module docs for conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSquarePulse {
    /// Amplitude magnitude, `0 <= amp <= 1`.
    pub amp: f64,
    /// Carrier phase in radians.
    pub phase: f64,
    /// Flank standard deviation in dt, `> 0`.
    pub sigma: f64,
    /// Flat-top length in dt, `>= 0`.
    pub width: f64,
    /// Flank length in dt on each side, `> 0`.
    pub risefall: f64,
}

impl GaussianSquarePulse {
    pub fn new(amp: f64, phase: f64, sigma: f64, width: f64, risefall: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&amp) || !amp.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "pulse amplitude {amp} outside [0, 1]"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidArgument("non-finite pulse phase".into()));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!("pulse sigma {sigma} <= 0")));
        }
        if width < 0.0 || !width.is_finite() {
            return Err(Error::InvalidArgument(format!("pulse width {width} < 0")));
        }
        if !(risefall > 0.0) || !risefall.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "pulse risefall {risefall} <= 0"
            )));
        }
        Ok(GaussianSquarePulse {
            amp,
            phase,
            sigma,
            width,
            risefall,
        })
    }

    /// Nominal duration in dt: `width + 2 * risefall`.
    pub fn duration(&self) -> f64 {
        self.width + 2.0 * self.risefall
    }

    /// Raw (unlifted) unit-amplitude envelope at position `x` in dt.
    ///
    /// Rises as a Gaussian centered on `risefall`, holds 1 across the top,
    /// falls as a Gaussian centered on `risefall + width`.
    fn raw_envelope(&self, x: f64) -> f64 {
        let rf = self.risefall;
        let top_end = rf + self.width;
        if x < rf {
            (-((x - rf) * (x - rf)) / (2.0 * self.sigma * self.sigma)).exp()
        } else if x < top_end {
            1.0
        } else {
            (-((x - top_end) * (x - top_end)) / (2.0 * self.sigma * self.sigma)).exp()
        }
    }

    /// Lifted unit-amplitude envelope: shifted and rescaled so the value one
    /// sample before the pulse window is exactly zero.
    fn lifted_unit_envelope(&self, x: f64) -> f64 {
        let floor = self.raw_envelope(-1.0);
        (self.raw_envelope(x) - floor) / (1.0 - floor)
    }
}

/// Integral of a GaussianSquare envelope; the scalar the device maps to a
/// rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PulseArea(pub f64);

/// Closed-form pulse area:
/// `|A| * (width + sqrt(2 pi) * sigma * erf(risefall / (sqrt(2) * sigma)))`.
pub fn pulse_area(p: &GaussianSquarePulse) -> PulseArea {
    let flank = (2.0 * PI).sqrt() * p.sigma * erf(p.risefall / (2.0_f64.sqrt() * p.sigma));
    PulseArea(p.amp * (p.width + flank))
}

/// Numerically integrated area of the lifted envelope over the pulse window,
/// by composite Simpson quadrature.
pub fn integrated_area(p: &GaussianSquarePulse) -> PulseArea {
    PulseArea(p.amp * unit_integral(p))
}

fn unit_integral(p: &GaussianSquarePulse) -> f64 {
    let duration = p.duration();
    let steps = ((duration / QUADRATURE_STEP).ceil() as usize).max(2);
    let steps = steps + steps % 2; // Simpson needs an even interval count
    let h = duration / steps as f64;
    let mut acc = p.lifted_unit_envelope(0.0) + p.lifted_unit_envelope(duration);
    for k in 1..steps {
        let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * p.lifted_unit_envelope(k as f64 * h);
    }
    acc * h / 3.0
}

/// Target area for an Rzx rotation of `theta`, scaled linearly from the
/// full quarter-turn area `alpha_star`:  `theta * alpha_star / (pi / 2)`.
///
/// `theta` must lie in `(0, pi/2]`; angles outside that range must be
/// normalized before pulse synthesis.
pub fn area_for_theta(theta: Angle, alpha_star: PulseArea) -> Result<PulseArea> {
    let t = theta.radians();
    if !(t > 0.0 && t <= FRAC_PI_2 + 1e-12) {
        return Err(Error::Contract(format!(
            "area scaling requires theta in (0, pi/2], got {t}"
        )));
    }
    if !(alpha_star.0 > 0.0) {
        return Err(Error::Contract(format!(
            "base area must be positive, got {}",
            alpha_star.0
        )));
    }
    Ok(PulseArea(t * alpha_star.0 / FRAC_PI_2))
}

/// Synthesize the tone for `Rzx(theta)` from the pair's base quarter-turn
/// pulse by shrinking the flat top to hit `area_for_theta`.
///
/// When the target area still exceeds the flank contribution, sigma,
/// risefall and amplitude are kept and only the width shrinks. Once the
/// target drops below what the flanks alone carry, the width is pinned to
/// zero and the amplitude is scaled down instead. `theta = pi/2` returns the
/// base pulse unchanged.
pub fn rzx_base_pulse(theta: Angle, base: &GaussianSquarePulse) -> Result<GaussianSquarePulse> {
    let t = theta.radians();
    if t == FRAC_PI_2 {
        return Ok(base.clone());
    }
    let alpha_star = pulse_area(base);
    let target = area_for_theta(theta, alpha_star)?;
    if target.0 > alpha_star.0 * (1.0 + 1e-9) {
        return Err(Error::Contract(format!(
            "target area {} exceeds base area {}",
            target.0, alpha_star.0
        )));
    }
    let flank = (2.0 * PI).sqrt() * base.sigma * erf(base.risefall / (2.0_f64.sqrt() * base.sigma));
    let flank_area = base.amp * flank;
    if target.0 >= flank_area {
        let width = target.0 / base.amp - flank;
        GaussianSquarePulse::new(base.amp, base.phase, base.sigma, width.max(0.0), base.risefall)
    } else {
        // Flanks alone already overshoot: zero width, scale the amplitude.
        let amp = base.amp * target.0 / flank_area;
        GaussianSquarePulse::new(amp, base.phase, base.sigma, 0.0, base.risefall)
    }
}

/// A duration-stretch ratio. The calibration search is boxed to
/// `[0.6, 1.5]`; construction enforces the same bounds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dsr(f64);

impl Dsr {
    pub const MIN: f64 = 0.6;
    pub const MAX: f64 = 1.5;
    pub const ONE: Dsr = Dsr(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || !(Self::MIN..=Self::MAX).contains(&value) {
            return Err(Error::InvalidArgument(format!(
                "dsr {value} outside [{}, {}]",
                Self::MIN,
                Self::MAX
            )));
        }
        Ok(Dsr(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Round a raw tick count to the nearest multiple of the hardware
/// granularity, halves up.
pub fn quantized_duration(raw_ticks: f64) -> f64 {
    (raw_ticks / DURATION_GRANULARITY + 0.5).floor() * DURATION_GRANULARITY
}

/// Stretch `p` by `dsr`, preserving its integrated area.
///
/// The new duration is `quantized_duration(duration * dsr)`; the realized
/// ratio `rdsr = new / old` then scales width, risefall and sigma, and the
/// amplitude is rescaled so the lifted-envelope integral matches the
/// original. A stretch that needs `|A| > 1` fails with
/// [`Error::AmplitudeSaturation`]. `dsr` that lands on the original
/// duration returns the pulse bit-identically.
pub fn stretch_pulse(p: &GaussianSquarePulse, dsr: Dsr) -> Result<GaussianSquarePulse> {
    let dur0 = p.duration();
    let dur1 = quantized_duration(dur0 * dsr.value());
    if dur1 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "stretch of a {dur0}-tick pulse by {} quantizes to zero duration",
            dsr.value()
        )));
    }
    if dur1 == dur0 {
        return Ok(p.clone());
    }
    let rdsr = dur1 / dur0;
    let stretched_shape = GaussianSquarePulse {
        amp: p.amp,
        phase: p.phase,
        sigma: p.sigma * rdsr,
        width: p.width * rdsr,
        risefall: p.risefall * rdsr,
    };
    let i0 = unit_integral(p);
    let i1 = unit_integral(&stretched_shape);
    let amp = p.amp * i0 / i1;
    if amp > 1.0 {
        return Err(Error::AmplitudeSaturation { required: amp });
    }
    GaussianSquarePulse::new(
        amp,
        p.phase,
        stretched_shape.sigma,
        stretched_shape.width,
        stretched_shape.risefall,
    )
}

/// A pulse channel: one drive line per qubit, one control line per directed
/// coupled pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Channel {
    Drive(usize),
    Control(usize, usize),
}

impl Channel {
    /// Qubits whose dynamics the channel touches.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Channel::Drive(q) => vec![*q],
            Channel::Control(c, t) => vec![*c, *t],
        }
    }

    pub fn name(&self) -> String {
        match self {
            Channel::Drive(q) => format!("d{q}"),
            Channel::Control(c, t) => format!("u{c}-{t}"),
        }
    }
}

impl TryFrom<String> for Channel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        let bad = || Error::Schema {
            path: "channel".into(),
            message: format!("unrecognized channel name {s:?}"),
        };
        if let Some(rest) = s.strip_prefix('d') {
            return rest.parse().map(Channel::Drive).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix('u') {
            let (c, t) = rest.split_once('-').ok_or_else(bad)?;
            return Ok(Channel::Control(
                c.parse().map_err(|_| bad())?,
                t.parse().map_err(|_| bad())?,
            ));
        }
        Err(bad())
    }
}

impl From<Channel> for String {
    fn from(c: Channel) -> String {
        c.name()
    }
}

/// What plays on a channel: a shaped tone or the fixed-length single-qubit
/// pulse slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PulsePayload {
    GaussianSquare {
        #[serde(flatten)]
        pulse: GaussianSquarePulse,
    },
    Sq {
        duration: u64,
    },
}

/// One scheduled pulse: a payload starting at `start` ticks on a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseInstruction {
    pub channel: Channel,
    pub start: u64,
    pub pulse: PulsePayload,
}

impl PulseInstruction {
    /// Emitted duration in whole ticks.
    pub fn duration_ticks(&self) -> u64 {
        match &self.pulse {
            PulsePayload::GaussianSquare { pulse } => pulse.duration().round() as u64,
            PulsePayload::Sq { duration } => *duration,
        }
    }

    pub fn end(&self) -> u64 {
        self.start + self.duration_ticks()
    }
}

/// A time-ordered pulse program.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct PulseSchedule {
    pub instructions: Vec<PulseInstruction>,
}

impl PulseSchedule {
    /// Channels referenced by the schedule, sorted and deduplicated.
    pub fn channels(&self) -> Vec<Channel> {
        let mut channels: Vec<Channel> = self.instructions.iter().map(|i| i.channel).collect();
        channels.sort();
        channels.dedup();
        channels
    }

    /// Makespan: the largest instruction end time, zero when empty.
    pub fn total_duration(&self) -> u64 {
        self.instructions.iter().map(|i| i.end()).max().unwrap_or(0)
    }
}

/// Wire format with a redundant channel listing for human readers.
#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    channels: Vec<Channel>,
    instructions: Vec<PulseInstruction>,
}

impl From<ScheduleRepr> for PulseSchedule {
    fn from(r: ScheduleRepr) -> Self {
        PulseSchedule {
            instructions: r.instructions,
        }
    }
}

impl From<PulseSchedule> for ScheduleRepr {
    fn from(s: PulseSchedule) -> Self {
        ScheduleRepr {
            channels: s.channels(),
            instructions: s.instructions,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> GaussianSquarePulse {
        GaussianSquarePulse::new(0.25, 0.0, 32.0, 624.0, 128.0).unwrap()
    }

    /// Independent fine-grained trapezoid quadrature of the lifted envelope,
    /// used as the oracle for area preservation.
    fn oracle_area(p: &GaussianSquarePulse) -> f64 {
        let duration = p.duration();
        let steps = (duration / 0.05).ceil() as usize;
        let h = duration / steps as f64;
        let mut acc = 0.5 * (p.lifted_unit_envelope(0.0) + p.lifted_unit_envelope(duration));
        for k in 1..steps {
            acc += p.lifted_unit_envelope(k as f64 * h);
        }
        p.amp * acc * h
    }

    #[test]
    fn zero_amplitude_means_zero_area() {
        let p = GaussianSquarePulse::new(0.0, 0.0, 64.0, 100.0, 128.0).unwrap();
        assert_eq!(pulse_area(&p).0, 0.0);
        assert!(integrated_area(&p).0.abs() < 1e-12);
    }

    #[test]
    fn vanishing_flanks_leave_the_flat_top_area() {
        // erf(rf / (sqrt(2) sigma)) -> 0 as rf -> 0+, so area -> |A| * width.
        let p = GaussianSquarePulse::new(1.0, 0.0, 64.0, 100.0, 1e-9).unwrap();
        assert!((pulse_area(&p).0 - 100.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_and_quadrature_agree_to_a_percent() {
        // Holds when the flanks decay essentially to zero inside the window
        // (risefall of several sigma), which device base pulses satisfy.
        for p in [
            base(),
            GaussianSquarePulse::new(0.2, 0.0, 32.0, 256.0, 128.0).unwrap(),
            GaussianSquarePulse::new(0.5, 1.0, 40.0, 0.0, 160.0).unwrap(),
        ] {
            let closed = pulse_area(&p).0;
            let numeric = integrated_area(&p).0;
            assert!(
                (closed - numeric).abs() / closed < 0.01,
                "closed {closed} vs numeric {numeric}"
            );
        }
    }

    #[test]
    fn area_scaling_is_linear_in_theta() {
        let a = area_for_theta(Angle::new(0.3), PulseArea(1000.0)).unwrap();
        assert!((a.0 - 0.3 * 1000.0 / FRAC_PI_2).abs() < 1e-9);
        let full = area_for_theta(Angle::new(FRAC_PI_2), PulseArea(1000.0)).unwrap();
        assert!((full.0 - 1000.0).abs() < 1e-9);
        assert!(area_for_theta(Angle::new(0.0), PulseArea(1000.0)).is_err());
        assert!(area_for_theta(Angle::new(-0.2), PulseArea(1000.0)).is_err());
        assert!(area_for_theta(Angle::new(2.0), PulseArea(1000.0)).is_err());
    }

    #[test]
    fn quarter_turn_returns_the_base_pulse_unchanged() {
        let b = base();
        let p = rzx_base_pulse(Angle::new(FRAC_PI_2), &b).unwrap();
        assert_eq!(p, b);
    }

    #[test]
    fn scaled_pulse_hits_the_target_area() {
        let b = base();
        for &theta in &[0.05, 0.2, 0.7, 1.2, 1.5, FRAC_PI_2] {
            let p = rzx_base_pulse(Angle::new(theta), &b).unwrap();
            let target = area_for_theta(Angle::new(theta), pulse_area(&b)).unwrap();
            assert!(
                (pulse_area(&p).0 - target.0).abs() / target.0 < 1e-12,
                "theta = {theta}"
            );
        }
    }

    #[test]
    fn small_angles_pin_width_and_scale_amplitude() {
        let b = base();
        // Threshold angle below which the flanks alone exceed the target.
        let flank = pulse_area(&GaussianSquarePulse::new(b.amp, 0.0, b.sigma, 0.0, b.risefall).unwrap());
        let threshold = FRAC_PI_2 * flank.0 / pulse_area(&b).0;
        let below = rzx_base_pulse(Angle::new(threshold * 0.5), &b).unwrap();
        assert_eq!(below.width, 0.0);
        assert!(below.amp < b.amp);
        let above = rzx_base_pulse(Angle::new(threshold * 1.5), &b).unwrap();
        assert!(above.width > 0.0);
        assert_eq!(above.amp, b.amp);
    }

    #[test]
    fn width_grows_monotonically_with_theta() {
        let b = base();
        let mut last = -1.0;
        for k in 1..=40 {
            let theta = FRAC_PI_2 * k as f64 / 40.0;
            let p = rzx_base_pulse(Angle::new(theta), &b).unwrap();
            let d = p.duration();
            assert!(d >= last, "duration shrank at theta = {theta}");
            last = d;
        }
    }

    #[test]
    fn stretch_quantizes_to_sixteen_ticks_and_rescales_shape() {
        // 320 ticks * 1.03 = 329.6 -> 336 ticks, realized ratio 1.05.
        let p = GaussianSquarePulse::new(0.3, 0.1, 64.0, 64.0, 128.0).unwrap();
        assert_eq!(p.duration(), 320.0);
        let s = stretch_pulse(&p, Dsr::new(1.03).unwrap()).unwrap();
        assert_eq!(s.duration(), 336.0);
        assert!((s.sigma - 64.0 * 1.05).abs() < 1e-12);
        assert!((s.width - 64.0 * 1.05).abs() < 1e-12);
        assert!((s.risefall - 128.0 * 1.05).abs() < 1e-12);
    }

    #[test]
    fn unit_stretch_is_bit_identical() {
        let p = base();
        let s = stretch_pulse(&p, Dsr::ONE).unwrap();
        assert_eq!(p, s);
    }

    #[test]
    fn stretch_preserves_integrated_area() {
        let p = base();
        for k in 0..=9 {
            let dsr = Dsr::new(0.6 + 0.1 * k as f64).unwrap();
            let s = stretch_pulse(&p, dsr).unwrap();
            let a0 = oracle_area(&p);
            let a1 = oracle_area(&s);
            assert!(
                (a0 - a1).abs() / a0 < 1e-6,
                "dsr {}: {a0} vs {a1}",
                dsr.value()
            );
        }
    }

    #[test]
    fn compression_can_saturate_the_amplitude() {
        let p = GaussianSquarePulse::new(0.9, 0.0, 64.0, 624.0, 128.0).unwrap();
        match stretch_pulse(&p, Dsr::new(0.6).unwrap()) {
            Err(Error::AmplitudeSaturation { required }) => assert!(required > 1.0),
            other => panic!("expected amplitude saturation, got {other:?}"),
        }
    }

    #[test]
    fn schedule_duration_is_the_makespan() {
        let mut sched = PulseSchedule::default();
        assert_eq!(sched.total_duration(), 0);
        sched.instructions.push(PulseInstruction {
            channel: Channel::Drive(0),
            start: 0,
            pulse: PulsePayload::Sq { duration: 160 },
        });
        sched.instructions.push(PulseInstruction {
            channel: Channel::Control(0, 1),
            start: 160,
            pulse: PulsePayload::GaussianSquare { pulse: base() },
        });
        assert_eq!(sched.total_duration(), 160 + 880);
        assert_eq!(
            sched.channels(),
            vec![Channel::Drive(0), Channel::Control(0, 1)]
        );
    }

    #[test]
    fn schedule_json_round_trip() {
        let mut sched = PulseSchedule::default();
        sched.instructions.push(PulseInstruction {
            channel: Channel::Control(1, 0),
            start: 32,
            pulse: PulsePayload::GaussianSquare { pulse: base() },
        });
        let text = serde_json::to_string(&sched).unwrap();
        assert!(text.contains("\"u1-0\""), "channel name in {text}");
        let back: PulseSchedule = serde_json::from_str(&text).unwrap();
        assert_eq!(sched, back);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn stretched_durations_are_quantized_and_area_preserved(
                amp in 0.05f64..0.5,
                sigma in 24.0f64..96.0,
                width in 0.0f64..900.0,
                risefall in 48.0f64..192.0,
                dsr in Dsr::MIN..Dsr::MAX,
            ) {
                let p = GaussianSquarePulse::new(amp, 0.0, sigma, width, risefall).unwrap();
                let s = stretch_pulse(&p, Dsr::new(dsr).unwrap()).unwrap();
                let ticks = s.duration();
                // The rescaled shape sums to the quantized duration up to
                // float ulps, which a plain modulo would misread on the
                // under side.
                let nearest = (ticks / DURATION_GRANULARITY).round() * DURATION_GRANULARITY;
                prop_assert!((ticks - nearest).abs() < 1e-6);
                let a0 = oracle_area(&p);
                let a1 = oracle_area(&s);
                prop_assert!((a0 - a1).abs() / a0 < 1e-6);
                // Realized ratio lands within half a granule of the request.
                let realized = ticks / p.duration();
                prop_assert!((realized - dsr).abs() <= 0.5 * DURATION_GRANULARITY / p.duration() + 1e-9);
            }
        }
    }
}
