use crate::error::{Error, Result};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};

/// Linear recurrence `u_{n+k} = α_1 u_{n+k-1} + ... + α_k u_n` with initial values
/// `u_j = β_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lrs {
    pub k: usize,
    pub alphas: Vec<Rat>,
    pub betas: Vec<Rat>,
}

impl Lrs {
    pub fn new(alphas: Vec<Rat>, betas: Vec<Rat>) -> Result<Lrs> {
        let l = Lrs { k: alphas.len(), alphas, betas };
        l.validate()?;
        Ok(l)
    }

    pub fn from_ints(alphas: &[i64], betas: &[i64]) -> Result<Lrs> {
        Lrs::new(alphas.iter().map(|&a| Rat::int(a)).collect(), betas.iter().map(|&b| Rat::int(b)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidArgument(format!("recurrence order must be at least 2, got {}", self.k)));
        }
        if self.alphas.len() != self.k || self.betas.len() != self.k {
            return Err(Error::InvalidArgument(format!(
                "order {} needs {} coefficients and {} initial values, got {} and {}",
                self.k,
                self.k,
                self.k,
                self.alphas.len(),
                self.betas.len()
            )));
        }
        Ok(())
    }

    pub fn parse(doc: &[u8]) -> Result<Lrs> {
        let l: Lrs = serde_json::from_slice(doc).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        l.validate()?;
        Ok(l)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("Lrs serializes")
    }

    /// `u_0 .. u_{count-1}`.
    pub fn terms(&self, count: usize) -> Vec<Rat> {
        let mut u: Vec<Rat> = self.betas.iter().take(count).cloned().collect();
        while u.len() < count {
            let n = u.len();
            let next = (1..=self.k).map(|i| &self.alphas[i - 1] * &u[n - i]).sum();
            u.push(next);
        }
        u
    }

    pub fn abs_alpha_sum(&self) -> Rat {
        self.alphas.iter().map(|a| a.abs()).sum()
    }

    pub fn max_abs_coefficient(&self) -> Rat {
        self.alphas.iter().chain(&self.betas).map(|x| x.abs()).max().unwrap_or_else(Rat::zero)
    }
}

/// First index `n <= horizon` with `u_n < 0`.
pub fn positivity_bruteforce(l: &Lrs, horizon: usize) -> Option<usize> {
    l.terms(horizon + 1).iter().position(|u| u.is_negative())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Pe,
    Cvar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rescaled {
    pub lrs: Lrs,
    pub lambda: Rat,
    /// Extra uniform factor on the whole sequence.
    pub kappa: Rat,
    /// Largest absolute coefficient of the input, used as `max(mu, 1)`.
    pub mu: Rat,
}

/// `4 k^{2k+2}`.
fn gadget_scale(k: usize) -> Rat {
    Rat::int(4) * Rat::int(k as i64).pow(2 * k as u64 + 2)
}

/// `1 / (2 k^{2(k-j)})`, the base goal probability of initial-value branch `j`.
pub fn base_goal_prob(k: usize, j: usize) -> Rat {
    (Rat::int(2) * Rat::int(k as i64).pow(2 * (k - j) as u64)).recip()
}

/// Checks the constraints a gadget needs from its (already rescaled) sequence.
pub fn check_regime(l: &Lrs, regime: Regime) -> Result<()> {
    l.validate()?;
    if let Some(j) = l.betas.iter().position(|b| b.is_negative()) {
        return Err(Error::NegativeInitialValue(j));
    }
    let sum = l.abs_alpha_sum();
    let k = l.k;
    match regime {
        Regime::Pe => {
            if sum >= Rat::new(1, 4) {
                return Err(Error::RescaleConstraintViolated(format!("sum |alpha_i| = {sum} is not below 1/4")));
            }
            let bound = gadget_scale(k).recip();
            if let Some(b) = l.betas.iter().find(|b| **b >= bound) {
                return Err(Error::RescaleConstraintViolated(format!("beta = {b} is not below {bound}")));
            }
        }
        Regime::Cvar => {
            let bound = Rat::new(1, 5 * (k as i64 + 1));
            if sum > bound {
                return Err(Error::RescaleConstraintViolated(format!("sum |alpha_i| = {sum} exceeds {bound}")));
            }
            let cap = &sum / Rat::int(3);
            if let Some(b) = l.betas.iter().find(|b| **b > cap) {
                return Err(Error::RescaleConstraintViolated(format!("beta = {b} exceeds sum |alpha_i| / 3 = {cap}")));
            }
        }
    }
    Ok(())
}

/// Rescales `u_n` to `κ λ^{n+1} u_n`, which keeps the sign pattern and fits the gadget.
pub fn rescale_lrs(l: &Lrs, regime: Regime) -> Result<Rescaled> {
    l.validate()?;
    if let Some(j) = l.betas.iter().position(|b| b.is_negative()) {
        return Err(Error::NegativeInitialValue(j));
    }
    let mu = l.max_abs_coefficient();
    if mu.is_zero() {
        return Ok(Rescaled { lrs: l.clone(), lambda: Rat::one(), kappa: Rat::one(), mu });
    }
    let mu1 = Rat::max_of(mu.clone(), Rat::one());
    let lambda = (&mu1 * gadget_scale(l.k)).recip();
    let alphas: Vec<Rat> = l.alphas.iter().enumerate().map(|(i, a)| a * lambda.pow(i as u64 + 1)).collect();
    let mut betas: Vec<Rat> = l.betas.iter().enumerate().map(|(j, b)| b * lambda.pow(j as u64 + 1)).collect();
    let sum: Rat = alphas.iter().map(|a| a.abs()).sum();
    let max_beta = betas.iter().max().cloned().unwrap_or_else(Rat::zero);
    let kappa = match regime {
        // the bound on β is strict and λμ' can hit it exactly
        Regime::Pe if max_beta >= gadget_scale(l.k).recip() => Rat::new(1, 2),
        Regime::Pe => Rat::one(),
        Regime::Cvar if max_beta.is_zero() => Rat::one(),
        Regime::Cvar if sum.is_zero() => {
            return Err(Error::RescaleConstraintViolated(
                "all coefficients vanish, so positive initial values cannot fit below sum |alpha_i| / 3".into(),
            ))
        }
        Regime::Cvar => Rat::min_of(Rat::one(), &sum / (Rat::int(3) * &max_beta)),
    };
    for b in &mut betas {
        *b = &*b * &kappa;
    }
    let lrs = Lrs { k: l.k, alphas, betas };
    check_regime(&lrs, regime)?;
    Ok(Rescaled { lrs, lambda, kappa, mu })
}

impl Rescaled {
    /// Rescaled term `κ λ^{n+1} u_n` from an original term.
    pub fn map_term(&self, n: usize, u: &Rat) -> Rat {
        u * self.lambda.pow(n as u64 + 1) * &self.kappa
    }
}
