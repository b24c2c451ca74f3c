//! Symmetric 2x2 conflict games over the strategies `T` (keep pursuing the
//! contested interest) and `G` (give it up).
//!
//! Payoff convention, row player first:
//!
//! ```text
//!            T          G
//!   T    (r2, r2)   (r3, r4)
//!   G    (r4, r3)   (r1, r1)
//! ```
//!
//! All comparisons are strict, so ties yield no dominant strategy or several
//! equilibria rather than an arbitrary pick.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conflict::{ConflictCategory, ConflictRecord};
use crate::model::{Configuration, ModelError, Scenario};
use crate::nbs::candidate_set;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    /// Continue to work on the interest.
    T,
    /// Give up the interest.
    G,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Strategy of (player 1, player 2).
pub type Profile = (Strategy, Strategy);

/// Every profile in the canonical reporting order.
pub const PROFILES: [Profile; 4] = [
    (Strategy::T, Strategy::T),
    (Strategy::T, Strategy::G),
    (Strategy::G, Strategy::T),
    (Strategy::G, Strategy::G),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("payoff entries must be finite")]
    NonFinite,
    #[error("conflict is {0}, payoffs can only be derived for an A1 conflict")]
    NotA1Conflict(ConflictCategory),
    #[error("grid for `{0}` has fewer than two points")]
    DegenerateGrid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    /// Each player's payoff under (G, G).
    pub r1: f64,
    /// Each player's payoff under (T, T).
    pub r2: f64,
    /// The T-player's payoff under (T, G).
    pub r3: f64,
    /// The G-player's payoff under (T, G).
    pub r4: f64,
}

impl PayoffMatrix {
    pub fn new(r1: f64, r2: f64, r3: f64, r4: f64) -> Result<Self, GameError> {
        let m = Self { r1, r2, r3, r4 };
        if m.entries().iter().all(|v| v.is_finite()) {
            Ok(m)
        } else {
            Err(GameError::NonFinite)
        }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.r1, self.r2, self.r3, self.r4]
    }

    /// Applies `x -> a*x + b` to every entry.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        let [r1, r2, r3, r4] = self.entries().map(|x| a * x + b);
        Self { r1, r2, r3, r4 }
    }

    /// Payoffs (player 1, player 2) under `profile`.
    pub fn payoffs(&self, profile: Profile) -> (f64, f64) {
        use Strategy::{G, T};
        match profile {
            (T, T) => (self.r2, self.r2),
            (T, G) => (self.r3, self.r4),
            (G, T) => (self.r4, self.r3),
            (G, G) => (self.r1, self.r1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameAnalysis {
    pub is_pd: bool,
    pub dominant: Option<Strategy>,
    pub pure_nash: Vec<Profile>,
    pub social_optimum: Vec<Profile>,
    /// `r1 - r2`; meaningful as the coordinator's gain when `is_pd` holds.
    pub coordination_gain: f64,
}

/// Both Dawes criteria: defecting (`T`) is strictly better whatever the
/// opponent does, and mutual cooperation beats mutual defection.
pub fn is_prisoners_dilemma(m: &PayoffMatrix) -> bool {
    let defect_dominates = m.r3 > m.r1 && m.r2 > m.r4;
    let cooperation_pays = m.r1 > m.r2;
    defect_dominates && cooperation_pays
}

pub fn dominant_strategy(m: &PayoffMatrix) -> Option<Strategy> {
    if m.r3 > m.r1 && m.r2 > m.r4 {
        Some(Strategy::T)
    } else if m.r1 > m.r3 && m.r4 > m.r2 {
        Some(Strategy::G)
    } else {
        None
    }
}

fn flip(s: Strategy) -> Strategy {
    match s {
        Strategy::T => Strategy::G,
        Strategy::G => Strategy::T,
    }
}

/// Profiles where no player gains strictly by deviating alone.
pub fn pure_nash(m: &PayoffMatrix) -> Vec<Profile> {
    PROFILES
        .into_iter()
        .filter(|&(a, b)| {
            let (u1, u2) = m.payoffs((a, b));
            m.payoffs((flip(a), b)).0 <= u1 && m.payoffs((a, flip(b))).1 <= u2
        })
        .collect()
}

/// Profiles maximizing the total payoff.
pub fn social_optimum(m: &PayoffMatrix) -> Vec<Profile> {
    let total = |p| {
        let (a, b) = m.payoffs(p);
        a + b
    };
    let best = PROFILES.into_iter().map(total).fold(f64::NEG_INFINITY, f64::max);
    PROFILES.into_iter().filter(|&p| total(p) == best).collect()
}

pub fn analyze(m: &PayoffMatrix) -> GameAnalysis {
    GameAnalysis {
        is_pd: is_prisoners_dilemma(m),
        dominant: dominant_strategy(m),
        pure_nash: pure_nash(m),
        social_optimum: social_optimum(m),
        coordination_gain: m.r1 - m.r2,
    }
}

/// One player's view of a derived game, before symmetrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerPayoffs {
    pub function: String,
    pub objective: String,
    /// Value of the contested parameter this player's objective prefers.
    pub preferred_value: f64,
    pub matrix: PayoffMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedGame {
    pub parameter: String,
    pub base_value: f64,
    /// Entry-wise mean of the two players' matrices.
    pub matrix: PayoffMatrix,
    pub players: [PlayerPayoffs; 2],
}

/// Grounds the abstract payoffs of an A1 conflict in objective values.
///
/// For the shared parameter `q`, each player's preferred value is the argmax
/// of its own utility over `q`'s grid (ties to the smaller value), all other
/// parameters at `config`. From player `i`'s point of view:
///
/// * `r1`: own utility with `q` left at `config`;
/// * `r3`: own utility with `q` at its own preference;
/// * `r4`: own utility with `q` at the other player's preference;
/// * `r2`: both write their preference and the last writer wins; the mean
///   over the two write orders, i.e. `(r3 + r4) / 2`.
pub fn derive_payoffs(
    scenario: &Scenario,
    conflict: &ConflictRecord,
    config: &Configuration,
) -> Result<DerivedGame, GameError> {
    if conflict.category != ConflictCategory::A1 {
        return Err(GameError::NotA1Conflict(conflict.category));
    }
    scenario.validate_configuration(config)?;
    let param = &conflict.subject;
    let spec = scenario
        .parameter(param)
        .ok_or_else(|| ModelError::UnknownParameter(param.clone()))?;
    let grid = candidate_set(spec).values;
    if grid.len() < 2 {
        return Err(GameError::DegenerateGrid(param.clone()));
    }

    let players = [&conflict.functions.0, &conflict.functions.1].map(|id| {
        scenario
            .function(id)
            .map(|f| (f.id.clone(), f.objective.clone()))
            .ok_or_else(|| GameError::Model(ModelError::InvalidConfiguration(format!("unknown function `{id}`"))))
    });
    let [p1, p2] = players;
    let (p1, p2) = (p1?, p2?);

    let utility = |objective: &str, value: f64| -> Result<f64, GameError> {
        let eval = scenario.evaluate(&config.with(param, value))?;
        Ok(scenario.utilities(&eval)[objective])
    };
    let preferred = |objective: &str| -> Result<f64, GameError> {
        let mut best: Option<(f64, f64)> = None;
        for &v in &grid {
            let u = utility(objective, v)?;
            if best.is_none_or(|(_, bu)| u > bu) {
                best = Some((v, u));
            }
        }
        Ok(best.map(|(v, _)| v).expect("grid is non-empty"))
    };

    let base_value = config.get(param).expect("validated");
    let pref = [preferred(&p1.1)?, preferred(&p2.1)?];
    let mut raw = Vec::with_capacity(2);
    for (i, (function, objective)) in [&p1, &p2].into_iter().enumerate() {
        let own = pref[i];
        let other = pref[1 - i];
        let r1 = utility(objective, base_value)?;
        let r3 = utility(objective, own)?;
        let r4 = utility(objective, other)?;
        let r2 = 0.5 * (r3 + r4);
        raw.push(PlayerPayoffs {
            function: function.clone(),
            objective: objective.clone(),
            preferred_value: own,
            matrix: PayoffMatrix::new(r1, r2, r3, r4)?,
        });
    }
    let [a, b]: [PlayerPayoffs; 2] = raw.try_into().expect("two players");
    let avg = |x: f64, y: f64| 0.5 * (x + y);
    let matrix = PayoffMatrix::new(
        avg(a.matrix.r1, b.matrix.r1),
        avg(a.matrix.r2, b.matrix.r2),
        avg(a.matrix.r3, b.matrix.r3),
        avg(a.matrix.r4, b.matrix.r4),
    )?;
    Ok(DerivedGame {
        parameter: param.clone(),
        base_value,
        matrix,
        players: [a, b],
    })
}
