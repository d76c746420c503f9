//! Scalar expressions in one variable, written with `x` or `s`.

use std::fmt;
use std::sync::Arc;

use exmex::prelude::*;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sharpeig_core::gamma_calculus::Coefficient;

use crate::error::{CliError, Result};

/// Expression source text. Numbers in a config are accepted as constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression(pub String);

impl Expression {
    pub fn new(src: impl Into<String>) -> Self {
        Self(src.into())
    }

    /// Compiles the expression; `field` names the config entry in errors.
    pub fn compile(&self, field: &str) -> Result<Coefficient> {
        let parsed = exmex::parse::<f64>(&self.0)
            .map_err(|e| CliError::usage(format!("field `{field}`: cannot parse `{}`: {}", self.0, e.msg())))?;
        let names: Vec<String> = parsed.var_names().to_vec();
        if let Some(bad) = names.iter().find(|v| *v != "x" && *v != "s") {
            return Err(CliError::usage(format!(
                "field `{field}`: unknown variable `{bad}` in `{}` (use x or s)",
                self.0
            )));
        }
        let width = names.len();
        let f = move |x: f64| {
            let args = [x; 2];
            parsed.eval(&args[..width]).unwrap_or(f64::NAN)
        };
        Ok(Arc::new(f))
    }

    /// Compiles and checks that the expression is finite on `grid`.
    pub fn compile_on(&self, field: &str, grid: &[f64]) -> Result<Coefficient> {
        let f = self.compile(field)?;
        if let Some(x) = grid.iter().find(|&&x| !f(x).is_finite()) {
            return Err(CliError::usage(format!("field `{field}`: `{}` is not finite at x = {x}", self.0)));
        }
        Ok(f)
    }

    /// True when the expression is identically `value` on `grid`.
    pub fn is_constant_on(f: &Coefficient, grid: &[f64], value: f64) -> bool {
        grid.iter().all(|&x| f(x) == value)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Expression {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Expression {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Expression;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an expression string or a number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Expression, E> {
                Ok(Expression::new(v))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Expression, E> {
                Ok(Expression::new(format!("{v:?}")))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Expression, E> {
                Ok(Expression::new(v.to_string()))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Expression, E> {
                Ok(Expression::new(v.to_string()))
            }
        }
        d.deserialize_any(V)
    }
}
