//! Model parameters shared by every engine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Endpoint condition: free (`f`) or pinned to the interface at time `N` (`c`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Free,
    Constrained,
}

impl Endpoint {
    pub const BOTH: [Endpoint; 2] = [Endpoint::Free, Endpoint::Constrained];

    pub fn tag(self) -> &'static str {
        match self {
            Endpoint::Free => "free",
            Endpoint::Constrained => "constrained",
        }
    }
}

impl std::str::FromStr for Endpoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "free" | "f" => Ok(Endpoint::Free),
            "constrained" | "c" => Ok(Endpoint::Constrained),
            other => Err(Error::invalid(
                "endpoint",
                format!("expected free|constrained, got `{other}`"),
            )),
        }
    }
}

/// Which monomers feel the disorder.
///
/// `Copolymer`: monomer `n` is penalized when it sits in the lower half-plane
/// (a zero inherits the sign of the preceding step). `Pinning`: monomer `n` is
/// weighted when `S_n = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Copolymer,
    Pinning,
}

impl Variant {
    pub fn tag(self) -> &'static str {
        match self {
            Variant::Copolymer => "copolymer",
            Variant::Pinning => "pinning",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "copolymer" => Ok(Variant::Copolymer),
            "pinning" => Ok(Variant::Pinning),
            other => Err(Error::invalid(
                "variant",
                format!("expected copolymer|pinning, got `{other}`"),
            )),
        }
    }
}

/// Coupling `lambda`, asymmetry `h`, length `n`, endpoint and variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub h: f64,
    pub n: usize,
    pub endpoint: Endpoint,
    pub variant: Variant,
}

impl ModelParams {
    pub fn copolymer(lambda: f64, h: f64, n: usize, endpoint: Endpoint) -> Result<Self> {
        let p = Self {
            lambda,
            h,
            n,
            endpoint,
            variant: Variant::Copolymer,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn pinning(lambda: f64, h: f64, n: usize, endpoint: Endpoint) -> Result<Self> {
        let p = Self {
            lambda,
            h,
            n,
            endpoint,
            variant: Variant::Pinning,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_endpoint(mut self, endpoint: Endpoint) -> Self {
        self.endpoint = endpoint;
        self
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n % 2 != 0 {
            return Err(Error::invalid(
                "N",
                format!("must be a positive even integer, got {}", self.n),
            ));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid(
                "lambda",
                format!("must satisfy lambda >= 0, got {}", self.lambda),
            ));
        }
        if !self.h.is_finite() {
            return Err(Error::invalid("h", "must be finite"));
        }
        if self.variant == Variant::Copolymer && self.h < 0.0 {
            return Err(Error::invalid(
                "h",
                format!("copolymer requires h >= 0, got {}", self.h),
            ));
        }
        Ok(())
    }

    pub(crate) fn require_copolymer(&self, op: &'static str) -> Result<()> {
        if self.variant != Variant::Copolymer {
            return Err(Error::invalid(
                "variant",
                format!("{op} is defined for the copolymer variant only"),
            ));
        }
        Ok(())
    }

    pub(crate) fn require_endpoint(&self, endpoint: Endpoint, op: &'static str) -> Result<()> {
        if self.endpoint != endpoint {
            return Err(Error::invalid(
                "endpoint",
                format!("{op} requires the {} endpoint", endpoint.tag()),
            ));
        }
        Ok(())
    }
}

/// Checks an external disorder slice against the model length.
pub(crate) fn check_disorder<T: crate::Real>(omega: &[T], n: usize) -> Result<()> {
    if omega.len() < n {
        return Err(Error::invalid(
            "omega",
            format!("length {} is shorter than N = {n}", omega.len()),
        ));
    }
    if omega[..n].iter().any(|w| w.is_nan()) {
        return Err(Error::invalid("omega", "contains NaN"));
    }
    Ok(())
}
