use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{Axis, CoherentComponent, InternalLevel, SuperpositionState};

/// Tolerance of the adaptive quadrature used for non-linear ramps.
pub const PHASE_QUADRATURE_TOL: f64 = 1e-10;

/// Transition amplitudes of one kick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickCoefficients {
    pub a: Complex64,
    pub b: Complex64,
}

impl KickCoefficients {
    /// Square pulse of the given area ∫Ω dt.
    pub fn pulse(area: f64) -> Self {
        let half = 0.5 * area;
        KickCoefficients {
            a: Complex64::new(half.cos(), 0.0),
            b: Complex64::new(0.0, -half.sin()),
        }
    }

    /// Adiabatic passage between two dressed-state mixing angles.
    pub fn adiabatic(spec: &AdiabaticSpec) -> Self {
        let (s, c) = spec.phase.sin_cos();
        let diff = spec.theta_start - spec.theta_end;
        let sum = spec.theta_start + spec.theta_end;
        KickCoefficients {
            a: Complex64::new(c * diff.cos(), s * sum.cos()),
            b: Complex64::new(c * diff.sin(), -s * sum.sin()),
        }
    }

    /// ||A|² + |B|² − 1|.
    pub fn unitarity_error(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() - 1.0).abs()
    }
}

/// Pulse coefficients for the given area; see [`KickCoefficients::pulse`].
pub fn pulse_coeffs(area: f64) -> KickCoefficients {
    KickCoefficients::pulse(area)
}

/// See [`KickCoefficients::adiabatic`].
pub fn adiabatic_coeffs(spec: &AdiabaticSpec) -> KickCoefficients {
    KickCoefficients::adiabatic(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Propagation direction of a laser beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Direction {
    pub axis: Axis,
    pub sign: Sign,
}

impl Direction {
    pub const PLUS_X: Direction = Direction::new(Axis::X, Sign::Plus);
    pub const MINUS_X: Direction = Direction::new(Axis::X, Sign::Minus);
    pub const PLUS_Y: Direction = Direction::new(Axis::Y, Sign::Plus);
    pub const MINUS_Y: Direction = Direction::new(Axis::Y, Sign::Minus);

    pub const fn new(axis: Axis, sign: Sign) -> Self {
        Direction { axis, sign }
    }

    pub fn reversed(self) -> Self {
        Direction::new(self.axis, self.sign.flipped())
    }

    /// Displacement ±iη received by the excited branch.
    pub fn recoil(self, eta: f64) -> Complex64 {
        Complex64::new(0.0, self.sign.value() * eta)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        write!(f, "{s}{}", self.axis)
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+x" | "x" => Ok(Direction::PLUS_X),
            "-x" => Ok(Direction::MINUS_X),
            "+y" | "y" => Ok(Direction::PLUS_Y),
            "-y" => Ok(Direction::MINUS_Y),
            other => Err(Error::invalid("direction", format!("expected ±x or ±y, got `{other}`"))),
        }
    }
}

impl TryFrom<String> for Direction {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Direction> for String {
    fn from(d: Direction) -> String {
        d.to_string()
    }
}

/// Mixing angle θ of the dressed states for detuning δ and Rabi frequency Ω:
/// cot 2θ = −δ/Ω with 0 ≤ 2θ < π (θ = π/2 only in the Ω → 0, δ > 0 limit).
pub fn mixing_angle(omega: f64, delta: f64) -> f64 {
    0.5 * omega.atan2(-delta)
}

/// Dressed-state passage: start and end mixing angles plus dynamical phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSpec {
    pub theta_start: f64,
    pub theta_end: f64,
    /// ε = ∫E₊ dt.
    pub phase: f64,
}

impl AdiabaticSpec {
    pub fn new(theta_start: f64, theta_end: f64, phase: f64) -> Result<Self> {
        let range = 0.0..=std::f64::consts::FRAC_PI_2;
        for (name, v) in [("theta_start", theta_start), ("theta_end", theta_end)] {
            if !range.contains(&v) {
                return Err(Error::invalid(name, format!("{v} is outside [0, π/2]")));
            }
        }
        if !phase.is_finite() {
            return Err(Error::invalid("phase", "must be finite"));
        }
        Ok(AdiabaticSpec {
            theta_start,
            theta_end,
            phase,
        })
    }

    /// Linear ramp δ0 → δτ over `duration` at constant Ω (all in units of ν).
    pub fn linear(omega: f64, delta_start: f64, delta_end: f64, duration: f64) -> Result<Self> {
        check_ramp(omega, duration)?;
        Self::new(
            mixing_angle(omega, delta_start),
            mixing_angle(omega, delta_end),
            linear_ramp_phase(omega, delta_start, delta_end, duration),
        )
    }

    /// Arbitrary detuning profile δ(t), t ∈ [0, duration]; the phase comes
    /// from adaptive Simpson quadrature.
    pub fn from_profile(omega: f64, detuning: impl Fn(f64) -> f64, duration: f64) -> Result<Self> {
        check_ramp(omega, duration)?;
        let phase = adaptive_simpson(
            &|t| 0.5 * detuning(t).hypot(omega),
            0.0,
            duration,
            PHASE_QUADRATURE_TOL,
        );
        Self::new(
            mixing_angle(omega, detuning(0.0)),
            mixing_angle(omega, detuning(duration)),
            phase,
        )
    }

    /// Same phase, mixing angles replaced by their Δ/Ω → ∞ limits
    /// (0 for δ < 0, π/4 for δ = 0, π/2 for δ > 0).
    pub fn with_limit_angles(self, delta_start: f64, delta_end: f64) -> Self {
        let limit = |d: f64| {
            if d < 0.0 {
                0.0
            } else if d == 0.0 {
                std::f64::consts::FRAC_PI_4
            } else {
                std::f64::consts::FRAC_PI_2
            }
        };
        AdiabaticSpec {
            theta_start: limit(delta_start),
            theta_end: limit(delta_end),
            ..self
        }
    }
}

fn check_ramp(omega: f64, duration: f64) -> Result<()> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::invalid("omega", "must be finite and non-negative"));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::invalid("duration", "must be finite and non-negative"));
    }
    Ok(())
}

/// ε = ∫ ½√(δ(t)² + Ω²) dt for δ linear in t, in closed form.
pub fn linear_ramp_phase(omega: f64, delta_start: f64, delta_end: f64, duration: f64) -> f64 {
    let span = delta_end - delta_start;
    if span.abs() <= f64::EPSILON * (delta_start.abs() + delta_end.abs()) {
        return 0.5 * delta_start.hypot(omega) * duration;
    }
    // ∫√(x² + a²) dx = ½[x√(x² + a²) + a² asinh(x/a)]
    let antiderivative = |x: f64| {
        let tail = if omega > 0.0 {
            omega * omega * (x / omega).asinh()
        } else {
            0.0
        };
        0.5 * (x * x.hypot(omega) + tail)
    };
    0.5 * duration / span * (antiderivative(delta_end) - antiderivative(delta_start))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Instantaneous kick: |g⟩|α⟩ → A|g⟩|α⟩ + B|e⟩D(s·iη)|α⟩ and
/// |e⟩|α⟩ → A*|e⟩|α⟩ − B*|g⟩D(−s·iη)|α⟩ on the direction's axis.
///
/// D(β)|α⟩ = e^(iIm(βα*))|α + β⟩; the phase e^(±isη·Re α) vanishes when the
/// kicked amplitude is imaginary, which is where every protocol applies its
/// pulses, but is required for unitarity in general.
///
/// Terms whose transition amplitude is exactly zero are dropped.
pub fn apply_kick(
    state: &SuperpositionState,
    kick: &KickCoefficients,
    direction: Direction,
    eta: f64,
) -> Result<SuperpositionState> {
    state.modes().check_axis(direction.axis)?;
    if !eta.is_finite() {
        return Err(Error::invalid("eta", "must be finite"));
    }
    let shift = direction.recoil(eta);
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(2 * state.len());
    for c in state.components() {
        let (stay, jump, step) = match c.level {
            InternalLevel::Ground => (kick.a, kick.b, shift),
            InternalLevel::Excited => (kick.a.conj(), -kick.b.conj(), -shift),
        };
        let along = c.alpha.get(direction.axis).unwrap_or_default();
        let phase = Complex64::from_polar(1.0, (step * along.conj()).im);
        if stay != zero {
            out.push(CoherentComponent {
                coeff: c.coeff * stay,
                ..*c
            });
        }
        if jump != zero {
            out.push(CoherentComponent::new(
                c.level.flipped(),
                c.coeff * jump * phase,
                c.alpha.map_axis(direction.axis, |a| a + step),
            ));
        }
    }
    Ok(SuperpositionState::from_parts_unchecked(state.modes(), out))
}
