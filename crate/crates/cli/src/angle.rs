use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

/// An angle given either as a rational multiple of π (`pi/4`, `-3pi/8`,
/// `3*pi/2`) or as plain radians (`0.3`).
#[derive(Clone, Debug, PartialEq)]
pub struct Angle {
    text: String,
    /// (numerator, denominator) when given as a multiple of π.
    ratio: Option<(i64, i64)>,
    value: f64,
}

impl Angle {
    pub fn radians(&self) -> f64 {
        self.value
    }

    pub fn ratio(&self) -> Option<(i64, i64)> {
        self.ratio
    }
}

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        let bad = || format!("cannot parse angle '{s}' (expected e.g. pi/4, -3pi/8 or 0.25)");
        let Some(pos) = t.find("pi") else {
            let value: f64 = t.parse().map_err(|_| bad())?;
            if !value.is_finite() {
                return Err(bad());
            }
            return Ok(Angle { text: s.to_string(), ratio: None, value });
        };
        let coeff = t[..pos].trim_end_matches('*');
        let rest = &t[pos + 2..];
        let num: i64 = match coeff {
            "" | "+" => 1,
            "-" => -1,
            c => c.parse().map_err(|_| bad())?,
        };
        let den: i64 = match rest {
            "" => 1,
            r => r.strip_prefix('/').ok_or_else(bad)?.parse().map_err(|_| bad())?,
        };
        if den <= 0 {
            return Err(bad());
        }
        let g = gcd(num.unsigned_abs(), den as u64) as i64;
        let (num, den) = if g == 0 { (0, 1) } else { (num / g, den / g) };
        Ok(Angle {
            text: s.to_string(),
            ratio: Some((num, den)),
            value: num as f64 * PI / den as f64,
        })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ratio {
            Some((0, _)) => write!(f, "0"),
            Some((n, 1)) => write!(f, "{n}pi"),
            Some((n, d)) => write!(f, "{n}pi/{d}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
