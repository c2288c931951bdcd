use super::build::{build_cvar_gadget, build_pe_gadget, build_wlf_gadget, cvar_prefix, Gadget, GadgetKind};
use super::levels::gadget_levels;
use super::lrs::Rescaled;
use crate::error::{Error, Result};
use crate::graph::{evaluate_policy, Sys};
use crate::matrix::{dot, RatMatrix};
use crate::mdp::{serialize_mdp, Decision, Mdp, Mode, Scheduler};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// The reference scheduler on a gadget. Its mode is the weight accumulated so far
/// (reset at Goal and Fail for the long-run gadget).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalScheduler {
    pub kind: GadgetKind,
    pub base_low: i64,
    pub k: usize,
    pub t: usize,
    pub s: usize,
    pub c: usize,
    pub tau: usize,
    pub gamma: usize,
    pub delta: usize,
    pub gamma_j: Vec<usize>,
    pub delta_j: Vec<usize>,
    pub reset: bool,
}

impl CanonicalScheduler {
    pub fn new(g: &Gadget) -> Result<Self> {
        let t = g.state("t")?;
        let s = g.state("s")?;
        let c = g.state("c")?;
        let k = g.lrs.k;
        Ok(CanonicalScheduler {
            kind: g.kind,
            base_low: g.kind.base_low(k),
            k,
            t,
            s,
            c,
            tau: g.action(c, "tau")?,
            gamma: g.action(t, "gamma")?,
            delta: g.action(s, "delta")?,
            gamma_j: (0..k).map(|j| g.action(t, &format!("gamma_{j}"))).collect::<Result<_>>()?,
            delta_j: (0..k).map(|j| g.action(s, &format!("delta_{j}"))).collect::<Result<_>>()?,
            reset: g.kind == GadgetKind::Wlf,
        })
    }

    /// Action at `t` (or `s`) when the accumulated weight is `w`.
    pub fn side_action(&self, on_t: bool, w: i64) -> usize {
        let j = w - self.base_low;
        match (on_t, (0..self.k as i64).contains(&j)) {
            (true, true) => self.gamma_j[j as usize],
            (false, true) => self.delta_j[j as usize],
            (true, false) => self.gamma,
            (false, false) => self.delta,
        }
    }

    pub fn to_json(&self) -> Value {
        let top = self.base_low + self.k as i64 - 1;
        let base: BTreeMap<String, Value> = (0..self.k)
            .map(|j| (format!("{}", self.base_low + j as i64), json!([format!("gamma_{j}"), format!("delta_{j}")])))
            .collect();
        json!({
            "c": "tau",
            "base_levels": base,
            "above": {"from": top + 1, "t": "gamma", "s": "delta"},
            "below": {"t": "gamma", "s": "delta"},
            "mode": "accumulated weight",
            "reset_at_goal_fail": self.reset,
        })
    }
}

impl Scheduler for CanonicalScheduler {
    fn decide(&self, _: &Mdp, s: usize, mode: &Mode) -> Result<Decision> {
        let w = mode.to_i64().ok_or_else(|| Error::Internal("weight level overflows i64".into()))?;
        let a = if s == self.c {
            self.tau
        } else if s == self.t {
            self.side_action(true, w)
        } else if s == self.s {
            self.side_action(false, w)
        } else {
            0
        };
        Ok(vec![(a, Rat::one())])
    }

    fn next_mode(&self, m: &Mdp, mode: &Mode, s: usize, a: usize, t: usize) -> Mode {
        let gf = |x: usize| m.is_goal(x) || m.is_fail(x);
        if self.reset && (gf(s) || gf(t)) {
            return BigInt::zero();
        }
        mode + &m.action(s, a).weight
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub theta: Rat,
    pub gadget: Gadget,
    pub canonical: CanonicalScheduler,
    pub lambda: Rat,
    pub kappa: Rat,
    pub mu: Rat,
    pub a: RatMatrix,
    pub a_vec: Vec<Rat>,
    pub b_vec: Vec<Rat>,
    pub c_vec: Vec<Rat>,
    pub v_minus1: Vec<Rat>,
    /// Named side quantities (e.g. return time, prefix threshold).
    pub extras: BTreeMap<String, Rat>,
    /// Prefix-extended CVaR instance.
    pub prefix: Option<Mdp>,
}

fn rats(v: &[Rat]) -> Value {
    json!(v.iter().map(|x| x.to_string()).collect::<Vec<_>>())
}

impl ThresholdReport {
    pub fn to_json(&self) -> Value {
        let a: Vec<Value> = (0..self.a.rows()).map(|i| rats(self.a.row(i))).collect();
        let mdp = |m: &Mdp| serde_json::from_slice::<Value>(&serialize_mdp(m)).expect("serialized model is JSON");
        json!({
            "kind": self.gadget.kind,
            "theta": self.theta.to_string(),
            "lrs": self.gadget.lrs.to_json(),
            "lambda": self.lambda.to_string(),
            "kappa": self.kappa.to_string(),
            "mu": self.mu.to_string(),
            "A": a,
            "a": rats(&self.a_vec),
            "b": rats(&self.b_vec),
            "c": rats(&self.c_vec),
            "v_minus1": rats(&self.v_minus1),
            "extras": self.extras.iter().map(|(k, v)| (k.clone(), json!(v.to_string()))).collect::<serde_json::Map<_, _>>(),
            "canonical_scheduler": self.canonical.to_json(),
            "gadget": mdp(&self.gadget.mdp),
            "prefix_gadget": self.prefix.as_ref().map(mdp),
        })
    }
}

/// Moves the canonical scheduler's values down by one block of k weight levels.
///
/// Rows are indexed by the starting level inside a block of levels `b0..b0+k-1` (highest
/// first), t-side rows before s-side rows. Returns `A` and, for partial expectations, the
/// vectors `a`, `b` of the goal contributions `n * a + b` of block `n`.
pub fn block_system(l: &crate::gadget::Lrs, b0: i64, goal_counts: bool) -> (RatMatrix, Vec<Rat>, Vec<Rat>) {
    let k = l.k as i64;
    let ku = l.k;
    let col = |side: usize, m: i64| side * ku + (b0 - 1 - m) as usize;
    let row = |side: usize, lvl: i64| side * ku + (b0 + k - 1 - lvl) as usize;
    // dist[side][lvl - b0] = (absorbed mass per column, goal mass per level offset)
    let mut dist: Vec<Vec<(Vec<Rat>, Vec<Rat>)>> = vec![Vec::new(), Vec::new()];
    let stay = Rat::one() - l.abs_alpha_sum();
    for lvl in b0..b0 + k {
        for side in 0..2 {
            let mut abs = vec![Rat::zero(); 2 * ku];
            let mut goal = vec![Rat::zero(); ku];
            goal[(lvl - b0) as usize] += &stay;
            for (i, a) in l.alphas.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let to_side = if a.is_positive() { side } else { 1 - side };
                let to = lvl - (i as i64 + 1);
                if to < b0 {
                    abs[col(to_side, to)] += a.abs();
                } else {
                    let (sa, sg) = &dist[to_side][(to - b0) as usize];
                    for (x, y) in abs.iter_mut().zip(sa) {
                        *x += &a.abs() * y;
                    }
                    for (x, y) in goal.iter_mut().zip(sg) {
                        *x += &a.abs() * y;
                    }
                }
            }
            dist[side].push((abs, goal));
        }
    }
    let n = 2 * ku;
    let mut a = RatMatrix::zeros(n, n);
    let mut av = vec![Rat::zero(); n];
    let mut bv = vec![Rat::zero(); n];
    for side in 0..2 {
        for lvl in b0..b0 + k {
            let r = row(side, lvl);
            let (abs, goal) = &dist[side][(lvl - b0) as usize];
            for (c, p) in abs.iter().enumerate() {
                a.set(r, c, p.clone());
            }
            if goal_counts {
                for (off, p) in goal.iter().enumerate() {
                    av[r] += Rat::int(k) * p;
                    bv[r] += Rat::int(b0 + off as i64) * p;
                }
            }
        }
    }
    (a, av, bv)
}

/// `c = (1/2^k, ..., 1/2, 0, ..., 0)`.
fn c_vector(k: usize) -> Vec<Rat> {
    let mut c: Vec<Rat> = (0..k).map(|r| Rat::new(1, 2).pow((k - r) as u64)).collect();
    c.resize(2 * k, Rat::zero());
    c
}

fn base_vector(g: &Gadget) -> Result<Vec<Rat>> {
    let k = g.lrs.k as i64;
    let low = g.kind.base_low(g.lrs.k);
    let lv = gadget_levels(g, low + k - 1)?;
    let levels: Vec<i64> = (0..k).map(|r| low + k - 1 - r).collect();
    Ok(levels.iter().map(|&w| lv.t_at(w).clone()).chain(levels.iter().map(|&w| lv.s_at(w).clone())).collect())
}

struct Series {
    a: RatMatrix,
    /// `A (I - 2^{-k} A)^{-1}`.
    m1: RatMatrix,
    s_a: RatMatrix,
    s_b: RatMatrix,
}

fn series(a: RatMatrix, k: usize) -> Result<Series> {
    let n = a.rows();
    if a.inf_norm() >= Rat::one() {
        return Err(Error::Internal("block matrix has a row sum of at least 1".into()));
    }
    let id = RatMatrix::identity(n);
    let x = Rat::new(1, 2).pow(k as u64);
    let two_k = Rat::int(2).pow(k as u64);
    let r = &two_k / (&two_k - Rat::one());
    let r2 = &two_k / ((&two_k - Rat::one()) * (&two_k - Rat::one()));
    let inv_x = (&id - &a.scale(&x)).inverse()?;
    let m1 = &a * &inv_x;
    let inv = (&id - &a).inverse()?;
    let s_b = &inv * &(&id.scale(&r) - &m1);
    let inner = &(&m1 - &a.scale(&r)) + &(&id - &a).scale(&r2);
    let s_a = &(&inv * &inv) * &inner;
    Ok(Series { a, m1, s_a, s_b })
}

fn report(g: Gadget, r: &Rescaled, theta: Rat, s: Series, av: Vec<Rat>, bv: Vec<Rat>, v: Vec<Rat>) -> Result<ThresholdReport> {
    Ok(ThresholdReport {
        theta,
        canonical: CanonicalScheduler::new(&g)?,
        c_vec: c_vector(g.lrs.k),
        gadget: g,
        lambda: r.lambda.clone(),
        kappa: r.kappa.clone(),
        mu: r.mu.clone(),
        a: s.a,
        a_vec: av,
        b_vec: bv,
        v_minus1: v,
        extras: BTreeMap::new(),
        prefix: None,
    })
}

/// Partial expectation of the canonical scheduler on the partial-expectation gadget.
pub fn threshold_pe(r: &Rescaled) -> Result<ThresholdReport> {
    let g = build_pe_gadget(&r.lrs)?;
    let k = r.lrs.k;
    let v = base_vector(&g)?;
    let (a, av, bv) = block_system(&r.lrs, 1, true);
    let s = series(a, k)?;
    let c = c_vector(k);
    let total: Vec<Rat> =
        s.m1.mul_vec(&v).iter().zip(s.s_a.mul_vec(&av)).zip(s.s_b.mul_vec(&bv)).map(|((x, y), z)| x + &y + &z).collect();
    let theta = dot(&c, &total);
    report(g, r, theta, s, av, bv, v)
}

/// Expectation of `min(weight, 0)` at goal under the canonical scheduler on the CVaR gadget.
pub fn threshold_cvar(r: &Rescaled) -> Result<ThresholdReport> {
    let g = build_cvar_gadget(&r.lrs)?;
    let k = r.lrs.k;
    let v = base_vector(&g)?;
    let (a, av, bv) = block_system(&r.lrs, 0, false);
    let s = series(a, k)?;
    let c = c_vector(k);
    // blocks start at level 0 here, so c weighs level l by 2^{-(l+1)}
    let half_sum = dot(&c, &s.m1.mul_vec(&v));
    let level0 = s.a.mul_vec(&v)[k - 1].clone();
    let theta = Rat::int(2) * &half_sum - &level0;
    let prefix = cvar_prefix(&g.mdp)?;
    let mut rep = report(g, r, theta, s, av, bv, v)?;
    rep.extras.insert("block_series".into(), half_sum);
    rep.extras.insert("cvar_half_threshold".into(), Rat::new(2, 3) * &rep.theta);
    rep.prefix = Some(prefix);
    Ok(rep)
}

/// Expected steps from `s_init` back to `s_init` (through Goal or Fail) under a memoryless
/// choice at c, t and s.
pub fn return_time(g: &Gadget, c_act: &str, t_act: &str, s_act: &str) -> Result<Rat> {
    let m = &g.mdp;
    let n = m.n_states();
    let mut policy = vec![0; n];
    for (st, a) in [("c", c_act), ("t", t_act), ("s", s_act)] {
        let x = g.state(st)?;
        policy[x] = g.action(x, a)?;
    }
    let sys = Sys::from_mdp(m).with_rewards(|_, _| Rat::one());
    let mut term = vec![None; n];
    for &x in m.goal().iter().chain(m.fail()) {
        term[x] = Some(Rat::one());
    }
    Ok(evaluate_policy(&sys, &term, &policy)?[g.state("s_init")?].clone())
}

/// Long-run threshold: the partial-expectation threshold over the expected return time.
pub fn threshold_wlf(r: &Rescaled) -> Result<ThresholdReport> {
    let pe = threshold_pe(r)?;
    let g = build_wlf_gadget(&r.lrs)?;
    let k = r.lrs.k;
    let last = format!("gamma_{}", k - 1);
    let last_d = format!("delta_{}", k - 1);
    let times = [
        return_time(&g, "tau", "gamma", "delta")?,
        return_time(&g, "sigma", "gamma_0", &last_d)?,
        return_time(&g, "tau", &last, "delta_0")?,
    ];
    if times.iter().any(|x| *x != times[0]) {
        return Err(Error::Internal(format!("return time depends on the scheduler: {times:?}")));
    }
    let ret = times[0].clone();
    let stated = Rat::int(4) + Rat::int(2) / (Rat::one() - r.lrs.abs_alpha_sum());
    let theta = &pe.theta / &ret;
    let mut extras = BTreeMap::new();
    extras.insert("theta_pe".into(), pe.theta.clone());
    extras.insert("return_time".into(), ret);
    extras.insert("stated_return_time".into(), stated.clone());
    extras.insert("theta_over_stated_return_time".into(), &pe.theta / &stated);
    Ok(ThresholdReport { theta, canonical: CanonicalScheduler::new(&g)?, gadget: g, extras, ..pe })
}

/// Exact enclosure of the series from its first `n` terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesBounds {
    pub truncated: Rat,
    pub lower: Rat,
    pub upper: Rat,
}

/// Encloses `sum_{l >= 1} 2^{-l} e(t, l)` using `n` levels.
///
/// Partial expectations satisfy `0 <= e(t, l) <= l`; the CVaR gadget has
/// `|e(t, l)| <= max |v_{-1}|` and `e <= 0` since the block matrix is substochastic.
pub fn series_bounds(g: &Gadget, n: u64) -> Result<SeriesBounds> {
    let lv = gadget_levels(g, n as i64)?;
    let half = Rat::new(1, 2);
    let truncated: Rat = (1..=n).map(|l| half.pow(l) * lv.t_at(l as i64)).sum();
    let tail_weight = half.pow(n);
    match g.kind {
        GadgetKind::Cvar => {
            let low = lv.low;
            let m = (low..low + g.lrs.k as i64)
                .flat_map(|w| [lv.t_at(w).abs(), lv.s_at(w).abs()])
                .max()
                .unwrap_or_else(Rat::zero);
            Ok(SeriesBounds { lower: &truncated - &m * &tail_weight, upper: truncated.clone(), truncated })
        }
        _ => {
            let tail = Rat::int(n as i64 + 2) * &tail_weight;
            Ok(SeriesBounds { lower: truncated.clone(), upper: &truncated + &tail, truncated })
        }
    }
}
