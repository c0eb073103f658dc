//! Builders for the experiment schedules: two-component cats (both
//! concatenation schemes), the reversal step, three/four- and six/eight-
//! component interferometers, the `m*pi` control variants, and kick-count
//! planning.
//!
//! Every builder emits an ordinary [`PulseProgram`] text (one instruction
//! per line) so schedules stay inspectable and reproducible; the scan delay
//! appears as the `theta` variable and the analysis-pulse phase as `phi`,
//! both bound at execution time.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Error;
use crate::operators::{KickDirection, TrapParams};
use crate::phase::{SpinLabel, SpinMotionState};
use crate::program::{Expr, Instruction, PulseProgram};
use crate::Result;

/// How consecutive kicks are concatenated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// One kick per laser pulse, beam paths swapped between pulses; the trap
    /// rotates by `omega / f_rep` between kicks.
    EveryPulse,
    /// One kick per half trap period, fixed beam paths; the trap rotates by
    /// `pi` between kicks.
    HalfPeriod,
}

/// Multicomponent interferometer size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatLevel {
    /// Three components at `theta = m pi`, four elsewhere.
    ThreeFour,
    /// Six components at the degenerate delays, eight elsewhere.
    SixEight,
}

/// A named schedule together with the qubit state it starts from.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub initial_spin: SpinLabel,
    pub program: PulseProgram,
}

impl Preset {
    pub fn initial_state(&self) -> SpinMotionState {
        SpinMotionState::ground(self.initial_spin)
    }
}

/// Kick count and wall time needed to reach a target separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulePlan {
    pub n_kicks: usize,
    pub scheme: Scheme,
    /// First kick to last kick, seconds.
    pub wall_time: f64,
    /// Separation actually reached, `2 eta n_kicks`.
    pub delta_alpha: f64,
    /// Set when the kick number is no longer small against
    /// `2 pi f_rep / omega` and the every-pulse growth rate starts to bend.
    pub rate_warning: bool,
}

fn push_kick_train(instrs: &mut Vec<Instruction>, directions: &[KickDirection], inter_wait: &Expr) {
    for (i, dir) in directions.iter().enumerate() {
        if i > 0 {
            instrs.push(Instruction::Wait {
                angle: inter_wait.clone(),
            });
        }
        instrs.push(Instruction::Sdk { direction: *dir });
    }
}

fn creation_directions(n_kicks: usize, scheme: Scheme) -> Vec<KickDirection> {
    (0..n_kicks)
        .map(|i| match scheme {
            Scheme::HalfPeriod => KickDirection::Plus,
            Scheme::EveryPulse => {
                if i % 2 == 0 {
                    KickDirection::Plus
                } else {
                    KickDirection::Minus
                }
            }
        })
        .collect()
}

fn inter_kick_wait(scheme: Scheme, trap: &TrapParams) -> Expr {
    match scheme {
        Scheme::HalfPeriod => Expr::Pi,
        Scheme::EveryPulse => Expr::Num(trap.phase_per_rep()),
    }
}

/// Creation half of a two-component cat: a `pi/2` pulse followed by
/// `n_kicks` concatenated kicks. Executed on `|down>|0>` this yields
/// `psi_2 = |up>|alpha> + |down>|-alpha>` with `|alpha| = n_kicks * eta`
/// (exactly for `HalfPeriod`; up to the per-kick trap rotation for
/// `EveryPulse`).
pub fn build_two_component(
    n_kicks: usize,
    scheme: Scheme,
    trap: &TrapParams,
) -> Result<PulseProgram> {
    if n_kicks == 0 {
        return Err(Error::InvalidArgument(
            "two-component cat needs n_kicks >= 1".to_string(),
        ));
    }
    let mut instrs = Vec::new();
    instrs.push(Instruction::Uw {
        phi_mu: Expr::Num(0.0),
        area: Expr::pi_over(2.0),
    });
    push_kick_train(
        &mut instrs,
        &creation_directions(n_kicks, scheme),
        &inter_kick_wait(scheme, trap),
    );
    let name = match scheme {
        Scheme::EveryPulse => alloc::format!("cat2-everypulse-n{n_kicks}-create"),
        Scheme::HalfPeriod => alloc::format!("cat2-halfperiod-n{n_kicks}-create"),
    };
    PulseProgram::new(&name, instrs)
}

/// Append the scan delay (`WAIT theta`) and the mirrored kick set to a
/// creation program: the section from the first to the last kick is replayed
/// in reverse order. Executed on `|down>|0>` the result is
/// `Psi_f = |up>|-alpha e^{-i theta} + alpha> + |down>|alpha e^{-i theta} - alpha>`;
/// at `theta = 2 pi` both components return to the origin and the spin
/// disentangles.
pub fn build_reversal(creation: &PulseProgram) -> Result<PulseProgram> {
    let instrs = creation.instructions();
    let first_kick = instrs
        .iter()
        .position(|i| matches!(i, Instruction::Sdk { .. }))
        .ok_or_else(|| Error::InvalidArgument("creation program has no kicks".to_string()))?;
    let last_kick = instrs
        .iter()
        .rposition(|i| matches!(i, Instruction::Sdk { .. }))
        .unwrap();

    let mut out = instrs.to_vec();
    out.push(Instruction::Wait { angle: Expr::Theta });
    out.extend(instrs[first_kick..=last_kick].iter().rev().cloned());
    PulseProgram::new(&alloc::format!("{}-reversed", creation.name()), out)
}

fn full_cat2(n_kicks: usize, scheme: Scheme, trap: &TrapParams) -> Result<Preset> {
    let creation = build_two_component(n_kicks, scheme, trap)?;
    let reversed = build_reversal(&creation)?;
    let mut instrs = reversed.instructions().to_vec();
    instrs.push(Instruction::Uw {
        phi_mu: Expr::Phi,
        area: Expr::pi_over(2.0),
    });
    let name = match scheme {
        Scheme::EveryPulse => "cat2-everypulse",
        Scheme::HalfPeriod => "cat2-halfperiod",
    };
    Ok(Preset {
        name: name.to_string(),
        initial_spin: SpinLabel::Down,
        program: PulseProgram::new(name, instrs)?,
    })
}

// An SDK set in the multicomponent schedules: two kicks bracketing half a
// trap period.
fn push_sdk_pair(instrs: &mut Vec<Instruction>) {
    instrs.push(Instruction::Sdk {
        direction: KickDirection::Plus,
    });
    instrs.push(Instruction::Wait { angle: Expr::Pi });
    instrs.push(Instruction::Sdk {
        direction: KickDirection::Plus,
    });
}

fn uw_pi_half(phi: Expr) -> Instruction {
    Instruction::Uw {
        phi_mu: phi,
        area: Expr::pi_over(2.0),
    }
}

/// Three/four- or six/eight-component interferometer with explicit microwave
/// phases (three for `ThreeFour`, four for `SixEight`); the scan delay is
/// the `theta` variable. Instructions are transcribed from the operator
/// product rightmost-first.
pub fn build_multicomponent_with(level: CatLevel, phases: &[Expr]) -> Result<Preset> {
    let mut instrs = Vec::new();
    match level {
        CatLevel::ThreeFour => {
            if phases.len() != 3 {
                return Err(Error::InvalidArgument(
                    "three/four-component schedule takes 3 microwave phases".to_string(),
                ));
            }
            instrs.push(uw_pi_half(phases[0].clone()));
            push_sdk_pair(&mut instrs);
            instrs.push(uw_pi_half(phases[1].clone()));
            instrs.push(Instruction::Wait { angle: Expr::Theta });
            push_sdk_pair(&mut instrs);
            instrs.push(uw_pi_half(phases[2].clone()));
            Ok(Preset {
                name: "cat34".to_string(),
                initial_spin: SpinLabel::Down,
                program: PulseProgram::new("cat34", instrs)?,
            })
        }
        CatLevel::SixEight => {
            if phases.len() != 4 {
                return Err(Error::InvalidArgument(
                    "six/eight-component schedule takes 4 microwave phases".to_string(),
                ));
            }
            instrs.push(uw_pi_half(phases[0].clone()));
            push_sdk_pair(&mut instrs);
            instrs.push(uw_pi_half(phases[1].clone()));
            instrs.push(Instruction::Wait {
                angle: Expr::pi_over(2.0),
            });
            // Four kicks at consecutive half periods: doubles the
            // separation along one quadrature.
            push_sdk_pair(&mut instrs);
            instrs.push(Instruction::Wait { angle: Expr::Pi });
            push_sdk_pair(&mut instrs);
            instrs.push(uw_pi_half(phases[2].clone()));
            instrs.push(Instruction::Wait { angle: Expr::Theta });
            push_sdk_pair(&mut instrs);
            instrs.push(uw_pi_half(phases[3].clone()));
            Ok(Preset {
                name: "cat68".to_string(),
                initial_spin: SpinLabel::Up,
                program: PulseProgram::new("cat68", instrs)?,
            })
        }
    }
}

/// Canonical multicomponent preset: all preparation phases zero, analysis
/// phase scanned as `phi`.
pub fn build_multicomponent(level: CatLevel) -> Preset {
    let phases: Vec<Expr> = match level {
        CatLevel::ThreeFour => alloc::vec![Expr::Num(0.0), Expr::Num(0.0), Expr::Phi],
        CatLevel::SixEight => {
            alloc::vec![Expr::Num(0.0), Expr::Num(0.0), Expr::Num(0.0), Expr::Phi]
        }
    };
    build_multicomponent_with(level, &phases).unwrap()
}

/// Control variant of the three/four-component schedule: the middle `pi/2`
/// pulse is replaced by an `m pi` pulse (omitted for `m = 0`). Revivals of
/// the `m = 0` and `m = 1` variants sit half a trap period apart in `theta`;
/// even `m` reproduces `m = 0` up to a global phase.
pub fn build_control_variant(m: u32) -> Result<Preset> {
    build_control_variant_with(m, &Expr::Num(0.0), &Expr::Num(0.0), &Expr::Phi)
}

/// [`build_control_variant`] with explicit first/middle/analysis phases.
pub fn build_control_variant_with(
    m: u32,
    phi_first: &Expr,
    phi_middle: &Expr,
    phi_analysis: &Expr,
) -> Result<Preset> {
    let mut instrs = Vec::new();
    instrs.push(uw_pi_half(phi_first.clone()));
    push_sdk_pair(&mut instrs);
    if m >= 1 {
        instrs.push(Instruction::Uw {
            phi_mu: phi_middle.clone(),
            area: Expr::pi_times(m as f64),
        });
    }
    instrs.push(Instruction::Wait { angle: Expr::Theta });
    push_sdk_pair(&mut instrs);
    instrs.push(uw_pi_half(phi_analysis.clone()));
    let name = alloc::format!("control-m{m}");
    Ok(Preset {
        name: name.clone(),
        initial_spin: SpinLabel::Down,
        program: PulseProgram::new(&name, instrs)?,
    })
}

/// Kick count and wall time to reach a target separation. The separation
/// grows by `2 eta` per kick in both schemes; kicks repeat every laser
/// period (`EveryPulse`) or every half trap period (`HalfPeriod`), so the
/// wall time from first to last kick is `(n - 1)` intervals.
pub fn plan_schedule(
    target_delta_alpha: f64,
    scheme: Scheme,
    trap: &TrapParams,
    eta: f64,
) -> Result<SchedulePlan> {
    if !target_delta_alpha.is_finite()
        || target_delta_alpha <= 0.0
        || !eta.is_finite()
        || eta <= 0.0
    {
        return Err(Error::InvalidArgument(
            "plan_schedule needs target_delta_alpha > 0 and eta > 0".to_string(),
        ));
    }
    let per_kick = 2.0 * eta;
    let n_kicks = libm::ceil(target_delta_alpha / per_kick).max(1.0) as usize;
    let interval = match scheme {
        Scheme::EveryPulse => 1.0 / trap.f_rep,
        Scheme::HalfPeriod => trap.half_period(),
    };
    // The linear growth rate of the every-pulse scheme holds only while the
    // kick number stays small against 2 pi f_rep / omega; flag from a
    // quarter of that bound up.
    let rate_warning = matches!(scheme, Scheme::EveryPulse)
        && (n_kicks as f64) > trap.every_pulse_kick_bound() / 4.0;
    Ok(SchedulePlan {
        n_kicks,
        scheme,
        wall_time: (n_kicks as f64 - 1.0) * interval,
        delta_alpha: per_kick * n_kicks as f64,
        rate_warning,
    })
}

/// The named presets: `cat2-everypulse`, `cat2-halfperiod`, `cat34`,
/// `cat68`, `control-m0`, `control-m1`.
pub fn preset_names() -> &'static [&'static str] {
    &[
        "cat2-everypulse",
        "cat2-halfperiod",
        "cat34",
        "cat68",
        "control-m0",
        "control-m1",
    ]
}

/// Parameters consumed by the cat2 presets; the multicomponent schedules
/// always use two kicks per set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetParams {
    pub n_kicks: usize,
    pub trap: TrapParams,
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams {
            n_kicks: 10,
            trap: TrapParams::default(),
        }
    }
}

/// Look up a preset by name.
pub fn build_preset(name: &str, params: &PresetParams) -> Result<Preset> {
    match name {
        "cat2-everypulse" => full_cat2(params.n_kicks, Scheme::EveryPulse, &params.trap),
        "cat2-halfperiod" => full_cat2(params.n_kicks, Scheme::HalfPeriod, &params.trap),
        "cat34" => Ok(build_multicomponent(CatLevel::ThreeFour)),
        "cat68" => Ok(build_multicomponent(CatLevel::SixEight)),
        "control-m0" => build_control_variant(0),
        "control-m1" => build_control_variant(1),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Cluster the motional labels of a state irrespective of spin; labels
/// closer than `tol` count as one component.
pub fn distinct_labels(state: &SpinMotionState, tol: f64) -> Vec<Complex64> {
    let mut labels: Vec<Complex64> = Vec::new();
    for t in state.terms() {
        let alpha = t.label.alpha();
        if !labels.iter().any(|l| (l - alpha).norm() <= tol) {
            labels.push(alpha);
        }
    }
    labels
}
