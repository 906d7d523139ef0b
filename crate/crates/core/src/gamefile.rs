//! JSON game files.
//!
//! ```json
//! {
//!   "players": [{"name": "row", "labels": ["U", "D"]}, {"labels": ["L", "R"]}],
//!   "parameters": {"a": 5.0},
//!   "distributions": {
//!     "f": {"components": [{"weight": 2, "center": "a", "rate": 20, "lo": "a - 0.5", "hi": "a + 0.5"}]},
//!     "one": {"atoms": [{"value": 1, "prob": 1}]}
//!   },
//!   "payoffs": [
//!     {"player": [1, 2], "profile": ["U", "L"], "dist": "f"},
//!     {"player": 1, "profile": ["U", "R"], "dist": {"atoms": [{"value": 3, "prob": 1}]}}
//!   ]
//! }
//! ```
//!
//! Players are numbered from 1. Any numeric field may instead be a string
//! expression over the declared parameters using `+ - * /` and parentheses.
//! A parameter declared as `null` must be bound by the caller.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{Atom, GaussComponent, PayoffDistribution};
use crate::error::{Error, Result};
use crate::game::{StochasticGame, StrategySet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Value(f64),
    Expr(String),
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::Value(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: Num,
    pub center: Num,
    pub rate: Num,
    pub lo: Num,
    pub hi: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub value: Num,
    pub prob: Num,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistRef {
    Name(String),
    Inline(DistSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlayerRef {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffSpec {
    pub player: PlayerRef,
    pub profile: Vec<String>,
    pub dist: DistRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: Vec<PlayerSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, Option<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub distributions: BTreeMap<String, DistSpec>,
    pub payoffs: Vec<PayoffSpec>,
}

/// Reads and builds a game, applying `bindings` over the file's parameter
/// defaults.
pub fn load_game(path: impl AsRef<Path>, bindings: &[(String, f64)]) -> Result<StochasticGame> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_game(&text, bindings)
}

pub fn parse_game(text: &str, bindings: &[(String, f64)]) -> Result<StochasticGame> {
    parse_file(text)?.build(bindings)
}

pub fn parse_file(text: &str) -> Result<GameFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

impl GameFile {
    /// Parameter values after applying `bindings`.
    pub fn resolve_parameters(&self, bindings: &[(String, f64)]) -> Result<HashMap<String, f64>> {
        let mut values = HashMap::new();
        for (name, v) in bindings {
            if !self.parameters.contains_key(name) {
                return Err(Error::InvalidArgument(format!("the game declares no parameter '{name}'")));
            }
            values.insert(name.clone(), *v);
        }
        for (name, default) in &self.parameters {
            if !values.contains_key(name) {
                let v = default.ok_or_else(|| Error::UnboundParameter(name.clone()))?;
                values.insert(name.clone(), v);
            }
        }
        Ok(values)
    }

    pub fn build(&self, bindings: &[(String, f64)]) -> Result<StochasticGame> {
        let params = self.resolve_parameters(bindings)?;
        let strategies = self
            .players
            .iter()
            .enumerate()
            .map(|(i, p)| StrategySet::new(i, p.labels.iter().cloned()))
            .collect::<Result<Vec<_>>>()?;
        let shape = crate::game::Shape::new(strategies.iter().map(StrategySet::len).collect());
        let n = strategies.len();
        let mut named = HashMap::new();
        for (name, spec) in &self.distributions {
            named.insert(name.as_str(), spec.build(&params)?);
        }

        let mut cells: Vec<Vec<Option<PayoffDistribution>>> = vec![vec![None; shape.num_profiles()]; n];
        for entry in &self.payoffs {
            if entry.profile.len() != n {
                return Err(Error::InvalidGame(format!(
                    "profile {:?} names {} strategies for {n} players",
                    entry.profile,
                    entry.profile.len()
                )));
            }
            let profile = entry
                .profile
                .iter()
                .zip(&strategies)
                .map(|(label, set)| {
                    set.index_of(label).ok_or_else(|| {
                        Error::InvalidGame(format!("player {} has no strategy '{label}'", set.player + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let dist = match &entry.dist {
                DistRef::Name(name) => named
                    .get(name.as_str())
                    .cloned()
                    .ok_or_else(|| Error::InvalidGame(format!("unknown distribution '{name}'")))?,
                DistRef::Inline(spec) => spec.build(&params)?,
            };
            let players = match &entry.player {
                PlayerRef::One(p) => vec![*p],
                PlayerRef::Many(ps) => ps.clone(),
            };
            let flat = shape.flat_index(&profile);
            for p in players {
                if p == 0 || p > n {
                    return Err(Error::InvalidGame(format!("player {p} out of range 1..={n}")));
                }
                let slot = &mut cells[p - 1][flat];
                if slot.is_some() {
                    return Err(Error::InvalidGame(format!(
                        "payoff for player {p} at ({}) given twice",
                        entry.profile.join(",")
                    )));
                }
                *slot = Some(dist.clone());
            }
        }

        let mut missing = Vec::new();
        for (i, table) in cells.iter().enumerate() {
            for (flat, cell) in table.iter().enumerate() {
                if cell.is_none() {
                    let labels: Vec<&str> = shape
                        .profile_at(flat)
                        .iter()
                        .zip(&strategies)
                        .map(|(&s, set)| set.labels[s].as_str())
                        .collect();
                    missing.push(format!("player {} at ({})", i + 1, labels.join(",")));
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingProfile(missing));
        }
        let payoffs = cells.into_iter().map(|t| t.into_iter().flatten().collect()).collect();
        StochasticGame::new(strategies, payoffs)
    }

    /// Self-contained description of `game`: no parameters, every payoff
    /// inline.
    pub fn from_game(game: &StochasticGame) -> Self {
        let players = game
            .strategies()
            .iter()
            .map(|s| PlayerSpec { name: None, labels: s.labels.clone() })
            .collect();
        let payoffs = (0..game.players())
            .flat_map(|i| {
                game.shape().iter_profiles().map(move |p| PayoffSpec {
                    player: PlayerRef::One(i + 1),
                    profile: game.profile_labels(&p),
                    dist: DistRef::Inline(DistSpec::from_distribution(game.payoff(i, &p))),
                })
            })
            .collect();
        GameFile {
            players,
            parameters: BTreeMap::new(),
            distributions: BTreeMap::new(),
            payoffs,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game files always serialize")
    }
}

impl DistSpec {
    pub fn build(&self, params: &HashMap<String, f64>) -> Result<PayoffDistribution> {
        let components = self
            .components
            .iter()
            .map(|c| {
                GaussComponent::new(
                    eval(&c.weight, params)?,
                    eval(&c.center, params)?,
                    eval(&c.rate, params)?,
                    eval(&c.lo, params)?,
                    eval(&c.hi, params)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok(Atom::new(eval(&a.value, params)?, eval(&a.prob, params)?)))
            .collect::<Result<Vec<_>>>()?;
        PayoffDistribution::new(components, atoms)?.normalize()
    }

    pub fn from_distribution(d: &PayoffDistribution) -> Self {
        DistSpec {
            components: d
                .components()
                .iter()
                .map(|c| ComponentSpec {
                    weight: c.weight.into(),
                    center: c.center.into(),
                    rate: c.rate.into(),
                    lo: c.lo.into(),
                    hi: c.hi.into(),
                })
                .collect(),
            atoms: d
                .atoms()
                .iter()
                .map(|a| AtomSpec { value: a.value.into(), prob: a.prob.into() })
                .collect(),
        }
    }
}

fn eval(n: &Num, params: &HashMap<String, f64>) -> Result<f64> {
    match n {
        Num::Value(v) => Ok(*v),
        Num::Expr(text) => {
            let mut p = ExprParser { src: text.as_bytes(), pos: 0, params };
            let v = p.expr()?;
            p.skip_ws();
            if p.pos != p.src.len() {
                return Err(p.fail("unexpected trailing input"));
            }
            Ok(v)
        }
    }
}

/// Recursive-descent evaluator for numeric expressions.
struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a HashMap<String, f64>,
}

impl ExprParser<'_> {
    fn fail(&self, what: &str) -> Error {
        Error::InvalidGame(format!(
            "in expression '{}' at offset {}: {what}",
            String::from_utf8_lossy(self.src),
            self.pos
        ))
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            v = if op == b'+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.factor()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            v = if op == b'*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn factor(&mut self) -> Result<f64> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.fail("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len() {
                    let c = self.src[self.pos];
                    let exp_sign = (c == b'+' || c == b'-') && matches!(self.src[self.pos - 1], b'e' | b'E');
                    if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
                text.parse().map_err(|_| self.fail("malformed number"))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
                    self.pos += 1;
                }
                let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                self.params.get(&name).copied().ok_or(Error::UnboundParameter(name))
            }
            _ => Err(self.fail("expected a number, parameter or '('")),
        }
    }
}
