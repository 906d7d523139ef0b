use riskaverse::{EquilibriumResult, StochasticGame};
use serde_json::{json, Map, Value};

/// Numeric formatting shared by every writer.
#[derive(Debug, Clone, Copy)]
pub struct Precision {
    pub raw: bool,
}

impl Precision {
    /// Rounds to six significant digits unless raw output was requested.
    pub fn round(self, x: f64) -> f64 {
        if self.raw || x == 0.0 || !x.is_finite() {
            return x;
        }
        let decimals = 5 - x.abs().log10().floor() as i32;
        if decimals <= 0 {
            let scale = 10f64.powi(-decimals);
            return (x / scale).round() * scale;
        }
        format!("{x:.*}", decimals as usize).parse().unwrap_or(x)
    }

    pub fn text(self, x: f64) -> String {
        self.round(x).to_string()
    }
}

pub fn equilibrium_json(game: &StochasticGame, eq: &EquilibriumResult, prec: Precision) -> Value {
    let labels = |i: usize| &game.strategies()[i].labels;
    let profile: Value = match &eq.pure {
        Some(p) => json!(game.profile_labels(&p.0)),
        None => Value::Array(
            (0..game.players())
                .map(|i| {
                    let map: Map<String, Value> = labels(i)
                        .iter()
                        .zip(eq.profile.player(i))
                        .map(|(l, &p)| (l.clone(), json!(prec.round(p))))
                        .collect();
                    Value::Object(map)
                })
                .collect(),
        ),
    };
    let support: Vec<Vec<&str>> = eq
        .support
        .iter()
        .enumerate()
        .map(|(i, s)| s.iter().map(|&k| labels(i)[k].as_str()).collect())
        .collect();
    let values: Vec<f64> = eq.values.iter().map(|&v| prec.round(v)).collect();
    let mut record = json!({
        "concept": eq.concept.to_string(),
        "kind": eq.kind.to_string(),
        "profile": profile,
        "support": support,
        "values": values,
    });
    if eq.degenerate {
        record["degenerate"] = json!(true);
    }
    if eq.approximate {
        record["approximate"] = json!(true);
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        let p = Precision { raw: false };
        assert_eq!(p.round(5.0 / 6.0), 0.833333);
        assert_eq!(p.round(0.76), 0.76);
        assert_eq!(p.round(1234567.8), 1234570.0);
        assert_eq!(p.round(-0.000123456789), -0.000123457);
        assert_eq!(Precision { raw: true }.round(5.0 / 6.0), 5.0 / 6.0);
    }
}
