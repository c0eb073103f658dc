//! Pulse programs: a small text format for experiment schedules, plus the
//! executor that runs a program against a [`SpinMotionState`].
//!
//! One instruction per line, `#` starts a comment, mnemonics are
//! case-insensitive:
//!
//! ```text
//! SDK +            # state-dependent kick, + or - beam configuration
//! WAIT pi          # free evolution by an angle (radians)
//! UW phi pi/2      # microwave pulse: axis phase, then pulse area
//! SETPHASE 0.3     # set the optical phase used by following kicks
//! ```
//!
//! Angle arguments are arithmetic expressions over numbers, `pi`, and the
//! scan variables `theta` and `phi`, with `+ - * /`, unary minus and
//! parentheses (no whitespace inside an expression). Scan variables are
//! bound at execution time, which lets one program text serve a whole
//! parameter scan. Programs round-trip through [`PulseProgram::format`].

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::operators::{
    apply_evolution, apply_sdk_with, apply_uwave_with, KickDirection, KickParams, RotationParams,
};
use crate::phase::{SpinMotionState, Tolerances};
use crate::Result;

/// Angle expression appearing in a program.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    /// Scan delay variable, bound at execution.
    Theta,
    /// Analysis-phase variable, bound at execution.
    Phi,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

/// Values for the scan variables referenced by a program.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub theta: Option<f64>,
    pub phi: Option<f64>,
}

impl Bindings {
    pub fn none() -> Self {
        Bindings::default()
    }

    pub fn theta(theta: f64) -> Self {
        Bindings {
            theta: Some(theta),
            phi: None,
        }
    }

    pub fn theta_phi(theta: f64, phi: f64) -> Self {
        Bindings {
            theta: Some(theta),
            phi: Some(phi),
        }
    }
}

impl Expr {
    pub fn eval(&self, bind: &Bindings, line: usize) -> Result<f64> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Pi => core::f64::consts::PI,
            Expr::Theta => bind.theta.ok_or(Error::UnboundVariable {
                name: "theta",
                line,
            })?,
            Expr::Phi => bind
                .phi
                .ok_or(Error::UnboundVariable { name: "phi", line })?,
            Expr::Neg(e) => -e.eval(bind, line)?,
            Expr::Add(a, b) => a.eval(bind, line)? + b.eval(bind, line)?,
            Expr::Sub(a, b) => a.eval(bind, line)? - b.eval(bind, line)?,
            Expr::Mul(a, b) => a.eval(bind, line)? * b.eval(bind, line)?,
            Expr::Div(a, b) => a.eval(bind, line)? / b.eval(bind, line)?,
        })
    }

    pub fn num(x: f64) -> Self {
        Expr::Num(x)
    }

    /// `n * pi` in the shortest canonical form.
    pub fn pi_times(n: f64) -> Self {
        if n == 1.0 {
            Expr::Pi
        } else {
            Expr::Mul(Box::new(Expr::Num(n)), Box::new(Expr::Pi))
        }
    }

    /// `pi / d` in canonical form.
    pub fn pi_over(d: f64) -> Self {
        Expr::Div(Box::new(Expr::Pi), Box::new(Expr::Num(d)))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            _ => 4,
        }
    }

    fn fmt_child(&self, child: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() < min_prec {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Pi => write!(f, "pi"),
            Expr::Theta => write!(f, "theta"),
            Expr::Phi => write!(f, "phi"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                self.fmt_child(e, 3, f)
            }
            Expr::Add(a, b) => {
                self.fmt_child(a, 1, f)?;
                write!(f, "+")?;
                self.fmt_child(b, 2, f)
            }
            Expr::Sub(a, b) => {
                self.fmt_child(a, 1, f)?;
                write!(f, "-")?;
                self.fmt_child(b, 2, f)
            }
            Expr::Mul(a, b) => {
                self.fmt_child(a, 2, f)?;
                write!(f, "*")?;
                self.fmt_child(b, 3, f)
            }
            Expr::Div(a, b) => {
                self.fmt_child(a, 2, f)?;
                write!(f, "/")?;
                self.fmt_child(b, 3, f)
            }
        }
    }
}

/// One schedule step.
#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Sdk { direction: KickDirection },
    Wait { angle: Expr },
    Uw { phi_mu: Expr, area: Expr },
    SetPhase { phi_lambda: Expr },
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Sdk { direction } => match direction {
                KickDirection::Plus => write!(f, "SDK +"),
                KickDirection::Minus => write!(f, "SDK -"),
            },
            Instruction::Wait { angle } => write!(f, "WAIT {angle}"),
            Instruction::Uw { phi_mu, area } => write!(f, "UW {phi_mu} {area}"),
            Instruction::SetPhase { phi_lambda } => write!(f, "SETPHASE {phi_lambda}"),
        }
    }
}

/// A parsed schedule: named, nonempty list of instructions.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseProgram {
    name: String,
    instrs: Vec<Instruction>,
}

impl PulseProgram {
    pub fn new(name: &str, instrs: Vec<Instruction>) -> Result<Self> {
        if instrs.is_empty() {
            return Err(Error::InvalidArgument("empty program".to_string()));
        }
        Ok(PulseProgram {
            name: name.to_string(),
            instrs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instrs
    }

    pub fn sdk_count(&self) -> usize {
        self.instrs
            .iter()
            .filter(|i| matches!(i, Instruction::Sdk { .. }))
            .count()
    }

    /// Programs with an odd kick count keep a residual optical-phase factor
    /// between their spin branches; even counts cancel it exactly.
    pub fn is_phase_sensitive(&self) -> bool {
        self.sdk_count() % 2 == 1
    }

    /// Canonical text form; reparses to an equal program.
    pub fn format(&self) -> String {
        let mut out = String::new();
        for instr in &self.instrs {
            out.push_str(&alloc::format!("{instr}\n"));
        }
        out
    }
}

/// Parse program text. Errors carry the 1-based line and column.
pub fn parse_program(name: &str, text: &str) -> Result<PulseProgram> {
    let mut instrs = Vec::new();
    for (line_idx, raw_line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }
        instrs.push(parse_line(line, line_no)?);
    }
    if instrs.is_empty() {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "program contains no instructions".to_string(),
        });
    }
    PulseProgram::new(name, instrs)
}

/// Evaluate a standalone angle expression (`pi/2`, `0.3`, `2*pi`, ...).
/// Used by the CLI for angle-valued configuration, so scan variables are
/// not allowed here.
pub fn parse_angle(text: &str) -> Result<f64> {
    let expr = parse_expr_field(text.trim(), 1, 1)?;
    expr.eval(&Bindings::none(), 1)
}

struct Field<'a> {
    text: &'a str,
    col: usize,
}

fn split_fields(line: &str) -> Vec<Field<'_>> {
    let mut fields = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                fields.push(Field {
                    text: &line[s..i],
                    col: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        fields.push(Field {
            text: &line[s..],
            col: s + 1,
        });
    }
    fields
}

fn parse_line(line: &str, line_no: usize) -> Result<Instruction> {
    let fields = split_fields(line);
    let mnemonic = &fields[0];
    let upper = mnemonic.text.to_uppercase();

    let expect_args = |n: usize| -> Result<()> {
        if fields.len() - 1 != n {
            Err(Error::Parse {
                line: line_no,
                col: mnemonic.col,
                msg: alloc::format!(
                    "{} takes {} argument(s), found {}",
                    upper,
                    n,
                    fields.len() - 1
                ),
            })
        } else {
            Ok(())
        }
    };

    match upper.as_str() {
        "SDK" => {
            expect_args(1)?;
            let arg = &fields[1];
            let direction = match arg.text {
                "+" => KickDirection::Plus,
                "-" => KickDirection::Minus,
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        col: arg.col,
                        msg: alloc::format!("expected + or -, found `{other}`"),
                    })
                }
            };
            Ok(Instruction::Sdk { direction })
        }
        "WAIT" => {
            expect_args(1)?;
            let angle = parse_expr_field(fields[1].text, line_no, fields[1].col)?;
            Ok(Instruction::Wait { angle })
        }
        "UW" => {
            expect_args(2)?;
            let phi_mu = parse_expr_field(fields[1].text, line_no, fields[1].col)?;
            let area = parse_expr_field(fields[2].text, line_no, fields[2].col)?;
            Ok(Instruction::Uw { phi_mu, area })
        }
        "SETPHASE" => {
            expect_args(1)?;
            let phi_lambda = parse_expr_field(fields[1].text, line_no, fields[1].col)?;
            Ok(Instruction::SetPhase { phi_lambda })
        }
        other => Err(Error::Parse {
            line: line_no,
            col: mnemonic.col,
            msg: alloc::format!("unknown mnemonic `{other}`"),
        }),
    }
}

// Recursive-descent expression parser over one whitespace-free field.
struct ExprParser<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col0: usize,
}

impl<'a> ExprParser<'a> {
    fn error(&self, msg: String) -> Error {
        Error::Parse {
            line: self.line,
            col: self.col0 + self.pos,
            msg,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                b'-' => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(op) = self.peek() {
            match op {
                b'*' => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                b'/' => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                // Fold a negated literal so `-2` round-trips as Num(-2).
                Ok(match self.factor()? {
                    Expr::Num(x) => Expr::Num(-x),
                    other => Expr::Neg(Box::new(other)),
                })
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(inner)
                } else {
                    Err(self.error("expected `)`".to_string()))
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.error(alloc::format!("unexpected character `{}`", c as char))),
            None => Err(self.error("unexpected end of expression".to_string())),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if c == b'e' || c == b'E' {
                // Exponent, possibly signed.
                let save = self.pos;
                self.pos += 1;
                if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
                if matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                    while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
                        self.pos += 1;
                    }
                } else {
                    self.pos = save;
                    break;
                }
            } else {
                break;
            }
        }
        let text = core::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.error(alloc::format!("malformed number `{text}`")))
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let word = core::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        match word.to_lowercase().as_str() {
            "pi" => Ok(Expr::Pi),
            "theta" => Ok(Expr::Theta),
            "phi" => Ok(Expr::Phi),
            other => Err(self.error(alloc::format!("unknown identifier `{other}`"))),
        }
    }
}

fn parse_expr_field(text: &str, line: usize, col: usize) -> Result<Expr> {
    let mut p = ExprParser {
        bytes: text.as_bytes(),
        pos: 0,
        line,
        col0: col,
    };
    if text.is_empty() {
        return Err(p.error("empty expression".to_string()));
    }
    let expr = p.expr()?;
    if p.pos != p.bytes.len() {
        return Err(p.error("trailing characters in expression".to_string()));
    }
    Ok(expr)
}

/// Run-level execution parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecParams {
    /// Lamb-Dicke parameter used by every SDK instruction.
    pub eta: f64,
    /// Optical phase in effect until the first SETPHASE.
    pub phi_lambda: f64,
    pub tolerances: Tolerances,
}

impl Default for ExecParams {
    fn default() -> Self {
        ExecParams {
            eta: KickParams::DEFAULT_ETA,
            phi_lambda: 0.0,
            tolerances: Tolerances::default(),
        }
    }
}

/// Execute a program against an initial state. Pure: the initial state is
/// untouched and a new state is returned.
pub fn execute(
    prog: &PulseProgram,
    initial: &SpinMotionState,
    params: &ExecParams,
    bind: &Bindings,
) -> Result<SpinMotionState> {
    let mut state = initial.clone();
    let mut phi_lambda = params.phi_lambda;
    for (idx, instr) in prog.instructions().iter().enumerate() {
        let line = idx + 1;
        state = match instr {
            Instruction::Sdk { direction } => {
                let k = KickParams::new(params.eta, phi_lambda, *direction)?;
                apply_sdk_with(&state, &k, &params.tolerances)?
            }
            Instruction::Wait { angle } => {
                let theta = angle.eval(bind, line)?;
                if theta < 0.0 {
                    return Err(Error::NegativeWait { line });
                }
                apply_evolution(&state, theta)
            }
            Instruction::Uw { phi_mu, area } => {
                let r = RotationParams::new(phi_mu.eval(bind, line)?, area.eval(bind, line)?)?;
                apply_uwave_with(&state, &r, &params.tolerances)
            }
            Instruction::SetPhase { phi_lambda: e } => {
                phi_lambda = e.eval(bind, line)?;
                state
            }
        };
    }
    Ok(state.canonicalized(&params.tolerances))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::SpinLabel;
    use core::f64::consts::{FRAC_PI_2, PI, TAU};

    #[test]
    fn parse_basic_program() {
        let p = parse_program("demo", "SDK +\nWAIT pi\nSDK +").unwrap();
        assert_eq!(p.instructions().len(), 3);
        assert_eq!(p.sdk_count(), 2);
        assert!(!p.is_phase_sensitive());
    }

    #[test]
    fn parse_pi_expression() {
        let p = parse_program("demo", "WAIT 2*pi").unwrap();
        match &p.instructions()[0] {
            Instruction::Wait { angle } => {
                assert!((angle.eval(&Bindings::none(), 1).unwrap() - TAU).abs() < 1e-15);
            }
            other => panic!("unexpected instruction {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_bad_direction() {
        let err = parse_program("demo", "SDK ?").unwrap_err();
        match err {
            Error::Parse { line, col, .. } => {
                assert_eq!(line, 1);
                assert_eq!(col, 5);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_unknown_mnemonic() {
        let err = parse_program("demo", "SDK +\nFLIP 3").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn parse_rejects_malformed_number() {
        let err = parse_program("demo", "WAIT 1.2.3").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn parse_handles_comments_and_case() {
        let text = "# schedule\n  sdk +   # kick\n\nwait PI/2\nUw phi pi/2\nsetphase -0.25\n";
        let p = parse_program("demo", text).unwrap();
        assert_eq!(p.instructions().len(), 4);
        match &p.instructions()[1] {
            Instruction::Wait { angle } => {
                assert!((angle.eval(&Bindings::none(), 1).unwrap() - FRAC_PI_2).abs() < 1e-15);
            }
            other => panic!("unexpected instruction {other:?}"),
        }
    }

    #[test]
    fn parse_empty_program_errors() {
        assert!(matches!(
            parse_program("demo", "# nothing here\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn expressions_round_trip_through_format() {
        let text = "SDK +\nWAIT pi\nWAIT 2*pi\nWAIT pi/2\nWAIT theta\nUW phi pi/2\n\
                    UW -0.5 3*pi/4\nSETPHASE 0.125\nWAIT (pi+1)/2\nWAIT 1e-3\n";
        let p = parse_program("demo", text).unwrap();
        let q = parse_program("demo", &p.format()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn angle_helper_rejects_scan_variables() {
        assert!((parse_angle(" pi/4 ").unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(parse_angle("theta").is_err());
    }

    #[test]
    fn execute_matches_direct_operator_calls() {
        use crate::operators::{apply_evolution, apply_sdk, apply_uwave};

        let text = "UW 0 pi/2\nSDK +\nWAIT theta\nSDK +\nUW phi pi/2";
        let prog = parse_program("mini", text).unwrap();
        let init = SpinMotionState::ground(SpinLabel::Down);
        let out = execute(
            &prog,
            &init,
            &ExecParams::default(),
            &Bindings::theta_phi(1.3, 0.4),
        )
        .unwrap();

        let mut direct = apply_uwave(&init, &RotationParams::pi_half(0.0));
        direct = apply_sdk(&direct, &KickParams::default()).unwrap();
        direct = apply_evolution(&direct, 1.3);
        direct = apply_sdk(&direct, &KickParams::default()).unwrap();
        direct = apply_uwave(&direct, &RotationParams::pi_half(0.4));
        let direct = direct.canonicalized(&Tolerances::default());

        assert_eq!(out.terms().len(), direct.terms().len());
        for (a, b) in out.terms().iter().zip(direct.terms()) {
            assert!((a.amp - b.amp).norm() < 1e-14);
            assert!((a.label.alpha() - b.label.alpha()).norm() < 1e-14);
        }
    }

    #[test]
    fn execute_unbound_variable_errors() {
        let prog = parse_program("mini", "WAIT theta").unwrap();
        let init = SpinMotionState::ground(SpinLabel::Down);
        let err = execute(&prog, &init, &ExecParams::default(), &Bindings::none()).unwrap_err();
        assert!(matches!(
            err,
            Error::UnboundVariable {
                name: "theta",
                line: 1
            }
        ));
    }

    #[test]
    fn execute_negative_wait_errors() {
        let prog = parse_program("mini", "WAIT -0.5").unwrap();
        let init = SpinMotionState::ground(SpinLabel::Down);
        let err = execute(&prog, &init, &ExecParams::default(), &Bindings::none()).unwrap_err();
        assert!(matches!(err, Error::NegativeWait { line: 1 }));
    }

    #[test]
    fn setphase_changes_following_kicks() {
        let with_setphase = parse_program("a", "SETPHASE 0.6\nSDK +\nSETPHASE 0\nSDK +").unwrap();
        let plain = parse_program("b", "SDK +\nSDK +").unwrap();
        let init = SpinMotionState::ground(SpinLabel::Down);
        let a = execute(
            &with_setphase,
            &init,
            &ExecParams::default(),
            &Bindings::none(),
        )
        .unwrap();
        let b = execute(&plain, &init, &ExecParams::default(), &Bindings::none()).unwrap();
        // First kick picks up e^{+i 0.6} on the down->up branch; the second
        // kick in `a` runs at phase 0, so the phases do not cancel.
        assert!((a.terms()[0].amp - b.terms()[0].amp).norm() > 0.1);
    }
}
