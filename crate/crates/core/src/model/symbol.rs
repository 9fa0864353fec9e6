use crate::error::{Error, Result};
use crate::grid::LinearTable;
use crate::model::density::LimitDensity;

/// Default number of intervals for tabulated functions.
pub const DEFAULT_RESOLUTION: usize = 4096;

/// The function `f` on [0, 1] whose samples `f(i/n)` fill the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSymbol {
    kind: SymbolKind,
    bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolKind {
    Identity,
    Constant(f64),
    /// Quantile function of a density, tabulated with linear interpolation.
    QuantileOfDensity { density: LimitDensity, table: LinearTable },
    Tabulated(LinearTable),
}

impl DiagonalSymbol {
    pub fn identity() -> Self {
        Self {
            kind: SymbolKind::Identity,
            bound: 1.0,
        }
    }

    pub fn constant(a: f64) -> Self {
        Self {
            kind: SymbolKind::Constant(a),
            bound: a.abs(),
        }
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        let table = LinearTable::new(0.0, 1.0, values)?;
        let bound = table.max_abs();
        Ok(Self {
            kind: SymbolKind::Tabulated(table),
            bound,
        })
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    /// `M = sup |f|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            SymbolKind::Identity => x.clamp(0.0, 1.0),
            SymbolKind::Constant(a) => *a,
            SymbolKind::QuantileOfDensity { table, .. } | SymbolKind::Tabulated(table) => {
                table.eval(x)
            }
        }
    }

    pub fn is_monotone(&self) -> bool {
        match &self.kind {
            SymbolKind::Identity | SymbolKind::Constant(_) => true,
            SymbolKind::QuantileOfDensity { table, .. } | SymbolKind::Tabulated(table) => {
                table.is_nondecreasing()
            }
        }
    }

    /// Whether distinct points of [0, 1] have distinct images.
    pub fn is_invertible(&self) -> bool {
        match &self.kind {
            SymbolKind::Identity => true,
            SymbolKind::Constant(_) => false,
            SymbolKind::QuantileOfDensity { table, .. } | SymbolKind::Tabulated(table) => {
                table.values().windows(2).all(|w| w[1] > w[0])
            }
        }
    }

    /// Generalized inverse on the spectrum; `None` when `f` is not invertible.
    pub fn inverse(&self, s: f64) -> Option<f64> {
        match &self.kind {
            SymbolKind::Identity => Some(s.clamp(0.0, 1.0)),
            SymbolKind::Constant(_) => None,
            SymbolKind::QuantileOfDensity { table, .. } | SymbolKind::Tabulated(table) => {
                Some(table.inverse(s))
            }
        }
    }

    /// The density of the push-forward of uniform([0,1]) when known.
    pub fn push_forward(&self) -> Option<&LimitDensity> {
        match &self.kind {
            SymbolKind::Identity => {
                static UNIFORM: LimitDensity = LimitDensity::UniformOn01;
                Some(&UNIFORM)
            }
            SymbolKind::QuantileOfDensity { density, .. } => Some(density),
            _ => None,
        }
    }
}

/// Builds `f` as the quantile function of `rho`, so that the push-forward of
/// the uniform law on [0, 1] by `f` is `rho`.
pub fn quantile_from_density(rho: &LimitDensity, resolution: usize) -> Result<DiagonalSymbol> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be >= 2, got {resolution}"
        )));
    }
    if let LimitDensity::UniformOn01 = rho {
        return Ok(DiagonalSymbol::identity());
    }
    let (lo, hi) = rho.support();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidDensity("unbounded support".into()));
    }
    if !(rho.cdf(hi) > 0.0) {
        return Err(Error::InvalidDensity("CDF has zero total mass".into()));
    }
    let mut values = Vec::with_capacity(resolution + 1);
    for k in 0..=resolution {
        let p = k as f64 / resolution as f64;
        let q = rho.quantile(p);
        if !q.is_finite() {
            return Err(Error::InvalidDensity(format!("quantile at {p} is not finite")));
        }
        values.push(q);
    }
    let table = LinearTable::new(0.0, 1.0, values)?;
    let bound = table.max_abs();
    Ok(DiagonalSymbol {
        kind: SymbolKind::QuantileOfDensity {
            density: rho.clone(),
            table,
        },
        bound,
    })
}
