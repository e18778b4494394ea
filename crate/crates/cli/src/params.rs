//! Solver-parameter flags shared by every subcommand that runs a method,
//! plus the small list syntaxes (`1-15,17`, `gcgpm,gmopcgm`).

use std::collections::BTreeMap;
use std::fmt;

use clap::Args;
use monoproj::{Method, MethodConfig};
use serde_json::Value;

/// Marks an error as a usage problem (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Overrides of the tuned defaults. Unset flags keep the method's own value;
/// the fixed-λ variants share the defaults of their family.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Direction parameter τ [default: gmopcgm 1, gcgpm 0.001]
    #[arg(long, help_heading = "Method parameters")]
    pub tau: Option<f64>,
    /// Backtracking factor ρ [default: gmopcgm 0.8, gcgpm 0.5]
    #[arg(long, help_heading = "Method parameters")]
    pub rho: Option<f64>,
    /// Initial trial step β (gmopcgm) or η (gcgpm) [default: gmopcgm 0.5, gcgpm 0.6]
    #[arg(long, help_heading = "Method parameters")]
    pub step0: Option<f64>,
    /// Line-search constant ζ [default: gmopcgm 0.0001, gcgpm 0.1]
    #[arg(long, help_heading = "Method parameters")]
    pub zeta: Option<f64>,
    /// Lower clamp ζ₁ on ‖G(z)‖ in the line search [default: gmopcgm 1, gcgpm 1]
    #[arg(long, help_heading = "Method parameters")]
    pub zeta1: Option<f64>,
    /// Upper clamp ζ₂ on ‖G(z)‖ in the line search [default: gmopcgm 1, gcgpm 1]
    #[arg(long, help_heading = "Method parameters")]
    pub zeta2: Option<f64>,
    /// Lower spectral bound α_min [default: gmopcgm 0.1, gcgpm 0.55]
    #[arg(long, help_heading = "Method parameters")]
    pub alpha_min: Option<f64>,
    /// Upper spectral bound α_max [default: gmopcgm 2, gcgpm 4.9]
    #[arg(long, help_heading = "Method parameters")]
    pub alpha_max: Option<f64>,
    /// Initial projection relaxation γ [default: gmopcgm 1.1, gcgpm 1.8]
    #[arg(long, help_heading = "Method parameters")]
    pub gamma0: Option<f64>,
    /// Cap of the adaptive γ rule [default: gmopcgm 1.8, gcgpm 1.7]
    #[arg(long, help_heading = "Method parameters")]
    pub gamma_cap: Option<f64>,
    /// Growth factor of the adaptive γ rule [default: gmopcgm 1.1, gcgpm 1.1]
    #[arg(long, help_heading = "Method parameters")]
    pub gamma_growth: Option<f64>,
    /// Threshold c of the lazy λ rule [default: gmopcgm 0.75, gcgpm 0.6]
    #[arg(long, help_heading = "Method parameters")]
    pub lambda_lazy_c: Option<f64>,
    /// Residual tolerance ε [default: gmopcgm 1e-11, gcgpm 1e-11]
    #[arg(long, help_heading = "Method parameters")]
    pub epsilon: Option<f64>,
    /// Iteration cap [default: gmopcgm 2000, gcgpm 2000]
    #[arg(long, help_heading = "Method parameters")]
    pub max_iter: Option<usize>,
    /// Line-search trial cap [default: gmopcgm 60, gcgpm 60]
    #[arg(long, help_heading = "Method parameters")]
    pub max_backtracks: Option<usize>,
    /// Adaptive γ rule on/off [default: gmopcgm true, gcgpm true]
    #[arg(long, value_name = "BOOL", help_heading = "Method parameters")]
    pub adaptive_gamma: Option<bool>,
    /// Lazy λ rule on/off [default: gmopcgm true, gcgpm true]
    #[arg(long, value_name = "BOOL", help_heading = "Method parameters")]
    pub lazy_lambda: Option<bool>,
}

impl ParamArgs {
    /// Every explicitly set parameter, keyed by its config name.
    pub fn overrides(&self) -> BTreeMap<&'static str, Value> {
        let mut m = BTreeMap::new();
        let mut put = |k: &'static str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k, v);
            }
        };
        put("tau", self.tau.map(Value::from));
        put("rho", self.rho.map(Value::from));
        put("step0", self.step0.map(Value::from));
        put("zeta", self.zeta.map(Value::from));
        put("zeta1", self.zeta1.map(Value::from));
        put("zeta2", self.zeta2.map(Value::from));
        put("alpha_min", self.alpha_min.map(Value::from));
        put("alpha_max", self.alpha_max.map(Value::from));
        put("gamma0", self.gamma0.map(Value::from));
        put("gamma_cap", self.gamma_cap.map(Value::from));
        put("gamma_growth", self.gamma_growth.map(Value::from));
        put("lambda_lazy_c", self.lambda_lazy_c.map(Value::from));
        put("epsilon", self.epsilon.map(Value::from));
        put("max_iter", self.max_iter.map(Value::from));
        put("max_backtracks", self.max_backtracks.map(Value::from));
        put("adaptive_gamma", self.adaptive_gamma.map(Value::from));
        put("lazy_lambda", self.lazy_lambda.map(Value::from));
        m
    }

    /// Defaults of `method` with the overrides applied, validated.
    pub fn config_for(&self, method: Method) -> monoproj::Result<MethodConfig> {
        let mut c = MethodConfig::defaults(method);
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(
            tau,
            rho,
            step0,
            zeta,
            zeta1,
            zeta2,
            alpha_min,
            alpha_max,
            gamma0,
            gamma_cap,
            gamma_growth,
            lambda_lazy_c,
            epsilon,
            max_iter,
            max_backtracks,
            adaptive_gamma,
            lazy_lambda
        );
        c.validate()?;
        Ok(c)
    }
}

pub fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|_| {
        let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
        format!(
            "unknown method '{s}' (expected one of {})",
            names.join(", ")
        )
    })
}

/// Parses `a-b,c,d-e` into the listed integers, in order, without
/// duplicates.
pub fn parse_int_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (parse_uint(a)?, parse_uint(b)?),
            None => {
                let v = parse_uint(part)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range '{part}'"));
        }
        for v in lo..=hi {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    if out.is_empty() {
        return Err(format!("empty list '{s}'"));
    }
    Ok(out)
}

fn parse_uint(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a non-negative integer"))
}
