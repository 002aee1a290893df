//! Problem-file ingestion and validation.
//!
//! A problem file is TOML with the field names below; expressions are
//! strings in the plain grammar, and derivative atoms (`psi`, `psi_x`,
//! ...) may appear in the operator coefficients.
//!
//! ```toml
//! variables = ["x", "y"]
//! coefficients = ["1", "-1"]
//! phi = "x/y"
//! order_n = 1
//! unknown = "psi"
//! solution_coefficients = ["c0", "c1"]
//! domain = { x = [1, 2], y = [1, 2] }
//! tolerance = 1e-8   # optional
//! samples = 32       # optional
//! seed = 42          # optional
//! ```

use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use weiss_core::defaults;
use weiss_core::diffop::DirectionalOperator;
use weiss_core::expr::{Expr, ParseContext, SampleDomain};
use weiss_core::verify::CheckOptions;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    variables: Vec<String>,
    coefficients: Vec<String>,
    phi: String,
    order_n: u32,
    #[serde(default = "default_unknown")]
    unknown: String,
    solution_coefficients: Vec<String>,
    #[serde(default)]
    domain: BTreeMap<String, [f64; 2]>,
    tolerance: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
}

fn default_unknown() -> String {
    "psi".to_string()
}

/// A validated problem: parsed operator, producing function, and options.
pub struct Problem {
    pub variables: Vec<String>,
    pub operator: DirectionalOperator,
    pub phi: Expr,
    pub order_n: u32,
    pub unknown: String,
    pub solution_coefficients: Vec<Expr>,
    pub context: ParseContext,
    domain: BTreeMap<String, [f64; 2]>,
    pub options: CheckOptions,
}

impl Problem {
    pub fn load(path: &Path) -> Result<Problem, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let file: ProblemFile =
            toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        Problem::from_file(file)
    }

    fn from_file(file: ProblemFile) -> Result<Problem, String> {
        if file.variables.is_empty() {
            return Err("at least one variable is required".into());
        }
        if file.coefficients.len() != file.variables.len() {
            return Err(format!(
                "{} variables but {} coefficients",
                file.variables.len(),
                file.coefficients.len()
            ));
        }
        let expected = (file.order_n as usize) + 1;
        if file.solution_coefficients.len() != expected {
            return Err(format!(
                "order_n = {} needs {expected} solution_coefficients, got {}",
                file.order_n,
                file.solution_coefficients.len()
            ));
        }

        let context = ParseContext::new(
            file.variables.iter().cloned(),
            [file.unknown.clone()],
        );
        let parse = |label: &str, text: &str| -> Result<Expr, String> {
            context
                .parse(text)
                .map_err(|e| format!("{label} `{text}`: {e}"))
        };

        let coefficients: Vec<Expr> = file
            .coefficients
            .iter()
            .map(|c| parse("coefficient", c))
            .collect::<Result<_, _>>()?;
        let phi = parse("phi", &file.phi)?;
        let solution_coefficients: Vec<Expr> = file
            .solution_coefficients
            .iter()
            .map(|c| parse("solution coefficient", c))
            .collect::<Result<_, _>>()?;
        for c in &solution_coefficients {
            match c {
                Expr::Rational(_) | Expr::Var(_) => {}
                other => {
                    return Err(format!(
                        "solution coefficients must be symbols or rationals, got `{other}`"
                    ))
                }
            }
        }

        let operator = DirectionalOperator::new(file.variables.clone(), coefficients)
            .map_err(|e| e.to_string())?;

        let options = CheckOptions {
            samples: file.samples.unwrap_or(defaults::SAMPLES),
            tol: file.tolerance.unwrap_or(defaults::TOL),
            seed: file.seed.unwrap_or(defaults::SEED),
        };

        Ok(Problem {
            variables: file.variables,
            operator,
            phi,
            order_n: file.order_n,
            unknown: file.unknown,
            solution_coefficients,
            context,
            domain: file.domain,
            options,
        })
    }

    /// True when no operator coefficient references the unknown.
    pub fn is_linear(&self) -> bool {
        self.operator.is_linear_in(&self.unknown)
    }

    /// Builds the sample domain: per-variable intervals from the file
    /// (default `[1, 2]`), plus extra axes (e.g. free solution-coefficient
    /// symbols) from `--domain` overrides.
    pub fn sample_domain(
        &self,
        overrides: &[(String, f64, f64)],
    ) -> Result<SampleDomain, String> {
        let mut intervals: Vec<(String, f64, f64)> = Vec::new();
        for var in &self.variables {
            let [lo, hi] = self.domain.get(var).copied().unwrap_or([1.0, 2.0]);
            intervals.push((var.clone(), lo, hi));
        }
        // Extra domain entries from the file that are not variables
        // (parameter axes).
        for (name, [lo, hi]) in &self.domain {
            if !self.variables.contains(name) {
                intervals.push((name.clone(), *lo, *hi));
            }
        }
        for (name, lo, hi) in overrides {
            match intervals.iter_mut().find(|(v, ..)| v == name) {
                Some(slot) => {
                    slot.1 = *lo;
                    slot.2 = *hi;
                }
                None => intervals.push((name.clone(), *lo, *hi)),
            }
        }
        SampleDomain::new(intervals).map_err(|e| e.to_string())
    }
}

/// Parses a `VAR:LO:HI` domain override.
pub fn parse_domain_flag(raw: &str) -> Result<(String, f64, f64), String> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected VAR:LO:HI, got `{raw}`"));
    }
    let lo: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad lower bound in `{raw}`"))?;
    let hi: f64 = parts[2]
        .parse()
        .map_err(|_| format!("bad upper bound in `{raw}`"))?;
    Ok((parts[0].to_string(), lo, hi))
}
