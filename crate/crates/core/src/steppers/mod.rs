//! One step of each of the eleven schemes and the history they carry.

mod implicit;
mod linear;

use core::fmt;
use core::str::FromStr;

pub use implicit::{step_be, step_bdf2, step_dirk2, step_eyre, step_secant, step_tr, DIRK2_ALPHA};
pub use linear::{step_imex1, step_sav1, step_sav2, step_sbdf2, Sav2Variant};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::solver::{SolveStats, SolverOptions};
use crate::spectral::Field;

/// SAV energy offset `C₀`.
pub const SAV_C0: f64 = 1.0;

/// The eleven time-stepping schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SchemeId {
    Be,
    Eyre,
    Imex1,
    Sav1,
    Tr,
    Secant,
    Bdf2,
    Dirk2,
    Sbdf2,
    Sav2A,
    Sav2B,
}

impl SchemeId {
    pub const ALL: [SchemeId; 11] = [
        SchemeId::Be,
        SchemeId::Eyre,
        SchemeId::Imex1,
        SchemeId::Sav1,
        SchemeId::Tr,
        SchemeId::Secant,
        SchemeId::Bdf2,
        SchemeId::Dirk2,
        SchemeId::Sbdf2,
        SchemeId::Sav2A,
        SchemeId::Sav2B,
    ];

    /// Formal order of accuracy.
    pub fn order(self) -> u32 {
        match self {
            SchemeId::Be | SchemeId::Eyre | SchemeId::Imex1 | SchemeId::Sav1 => 1,
            _ => 2,
        }
    }

    /// Number of past solution levels a step consumes.
    pub fn history_depth(self) -> usize {
        if self.is_multistep() { 2 } else { 1 }
    }

    pub fn is_multistep(self) -> bool {
        matches!(self, SchemeId::Bdf2 | SchemeId::Sbdf2 | SchemeId::Sav2A | SchemeId::Sav2B)
    }

    /// Linear schemes need only diagonal solves; the rest run Newton-PCG.
    pub fn is_linear(self) -> bool {
        matches!(
            self,
            SchemeId::Imex1 | SchemeId::Sav1 | SchemeId::Sbdf2 | SchemeId::Sav2A | SchemeId::Sav2B
        )
    }

    pub fn uses_sav(self) -> bool {
        matches!(self, SchemeId::Sav1 | SchemeId::Sav2A | SchemeId::Sav2B)
    }

    /// Scheme used for the first step of a multistep method.
    pub fn startup(self) -> SchemeId {
        match self {
            SchemeId::Bdf2 => SchemeId::Tr,
            SchemeId::Sbdf2 | SchemeId::Sav2A | SchemeId::Sav2B => SchemeId::Imex1,
            s => s,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Be => "BE",
            SchemeId::Eyre => "Eyre",
            SchemeId::Imex1 => "IMEX1",
            SchemeId::Sav1 => "SAV1",
            SchemeId::Tr => "TR",
            SchemeId::Secant => "Secant",
            SchemeId::Bdf2 => "BDF2",
            SchemeId::Dirk2 => "DIRK2",
            SchemeId::Sbdf2 => "SBDF2",
            SchemeId::Sav2A => "SAV2-A",
            SchemeId::Sav2B => "SAV2-B",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Unknown scheme name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseSchemeError;

impl fmt::Display for ParseSchemeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown scheme; expected one of be, eyre, imex1, sav1, tr, secant, bdf2, dirk2, sbdf2, sav2a, sav2b")
    }
}

impl core::error::Error for ParseSchemeError {}

impl FromStr for SchemeId {
    type Err = ParseSchemeError;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let mut key = [0u8; 8];
        let mut len = 0;
        for b in s.bytes().filter(|b| *b != b'-' && *b != b'_') {
            if len == key.len() {
                return Err(ParseSchemeError);
            }
            key[len] = b.to_ascii_lowercase();
            len += 1;
        }
        Ok(match &key[..len] {
            b"be" => SchemeId::Be,
            b"eyre" => SchemeId::Eyre,
            b"imex1" => SchemeId::Imex1,
            b"sav1" => SchemeId::Sav1,
            b"tr" => SchemeId::Tr,
            b"secant" | b"s" => SchemeId::Secant,
            b"bdf2" => SchemeId::Bdf2,
            b"dirk2" => SchemeId::Dirk2,
            b"sbdf2" => SchemeId::Sbdf2,
            b"sav2a" => SchemeId::Sav2A,
            b"sav2b" => SchemeId::Sav2B,
            _ => return Err(ParseSchemeError),
        })
    }
}

/// Solution level `u` at time `t` plus whatever history the scheme needs.
///
/// `u_prev` sits at `t − spacing` and `u_prev2` at `t − spacing − spacing_prev`.
/// `r` is the SAV auxiliary scalar at `t`.
#[derive(Clone, Debug)]
pub struct StepperState {
    pub u: Field,
    pub t: f64,
    pub u_prev: Option<Field>,
    pub u_prev2: Option<Field>,
    pub spacing: f64,
    pub spacing_prev: f64,
    pub r: Option<f64>,
    pub r_prev: Option<f64>,
    pub r_prev2: Option<f64>,
}

impl StepperState {
    /// Fresh state at `t = 0`; SAV schemes start from `r = √(E₁(u₀) + C₀)`.
    pub fn new(model: &Model, scheme: SchemeId, u0: Field) -> Result<Self> {
        let r = if scheme.uses_sav() { Some(sav_scalar(model, &u0)?) } else { None };
        Ok(Self {
            u: u0,
            t: 0.0,
            u_prev: None,
            u_prev2: None,
            spacing: 0.0,
            spacing_prev: 0.0,
            r,
            r_prev: None,
            r_prev2: None,
        })
    }

    /// Pushes a new level reached after a step of size `k`.
    pub fn advanced(&self, u: Field, r: Option<f64>, k: f64) -> Self {
        Self {
            u,
            t: self.t + k,
            u_prev: Some(self.u.clone()),
            u_prev2: self.u_prev.clone(),
            spacing: k,
            spacing_prev: self.spacing,
            r,
            r_prev: self.r,
            r_prev2: self.r_prev,
        }
    }

    /// Forgets multistep history.
    pub fn without_history(&self) -> Self {
        Self {
            u: self.u.clone(),
            t: self.t,
            u_prev: None,
            u_prev2: None,
            spacing: 0.0,
            spacing_prev: 0.0,
            r: self.r,
            r_prev: None,
            r_prev2: None,
        }
    }
}

/// `√(E₁(u) + C₀)`.
pub fn sav_scalar(model: &Model, u: &Field) -> Result<f64> {
    let radicand = model.sav_bulk_energy(u) + SAV_C0;
    if !(radicand > 0.0) {
        return Err(Error::NegativeRadicand(radicand));
    }
    Ok(libm::sqrt(radicand))
}

fn same_spacing(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Advances `state` by one step of size `k` with `scheme`.
///
/// Multistep schemes take their startup step when no history is present and
/// otherwise require `state.spacing == k`.
pub fn step(
    model: &Model,
    scheme: SchemeId,
    state: &StepperState,
    k: f64,
    opts: &SolverOptions,
) -> Result<(StepperState, SolveStats)> {
    let u_n = &state.u;
    let history = match &state.u_prev {
        Some(prev) if scheme.is_multistep() => {
            if !same_spacing(state.spacing, k) {
                return Err(Error::MissingHistory);
            }
            Some(prev)
        }
        _ => None,
    };
    let none = SolveStats::default();
    let (u, r, stats) = match (scheme, history) {
        (SchemeId::Be, _) => with_r(step_be(model, u_n, k, opts)?),
        (SchemeId::Eyre, _) => with_r(step_eyre(model, u_n, k, opts)?),
        (SchemeId::Tr, _) | (SchemeId::Bdf2, None) => with_r(step_tr(model, u_n, k, opts)?),
        (SchemeId::Secant, _) => with_r(step_secant(model, u_n, k, opts)?),
        (SchemeId::Dirk2, _) => with_r(step_dirk2(model, u_n, k, opts)?),
        (SchemeId::Bdf2, Some(prev)) => with_r(step_bdf2(model, u_n, prev, k, opts)?),
        (SchemeId::Imex1, _) | (SchemeId::Sbdf2, None) => (step_imex1(model, u_n, k), None, none),
        (SchemeId::Sbdf2, Some(prev)) => (step_sbdf2(model, u_n, prev, k), None, none),
        (SchemeId::Sav1, _) => {
            let r_n = state.r.ok_or(Error::MissingAuxiliary)?;
            let (u, r) = step_sav1(model, u_n, r_n, k)?;
            (u, Some(r), none)
        }
        (SchemeId::Sav2A | SchemeId::Sav2B, None) => {
            let u = step_imex1(model, u_n, k);
            let r = sav_scalar(model, &u)?;
            (u, Some(r), none)
        }
        (SchemeId::Sav2A | SchemeId::Sav2B, Some(prev)) => {
            let r_n = state.r.ok_or(Error::MissingAuxiliary)?;
            let r_prev = state.r_prev.ok_or(Error::MissingAuxiliary)?;
            let variant = if scheme == SchemeId::Sav2A { Sav2Variant::A } else { Sav2Variant::B };
            let (u, r) = step_sav2(model, u_n, prev, r_n, r_prev, k, variant)?;
            (u, Some(r), none)
        }
    };
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok((state.advanced(u, r, k), stats))
}

fn with_r((u, stats): (Field, SolveStats)) -> (Field, Option<f64>, SolveStats) {
    (u, None, stats)
}
