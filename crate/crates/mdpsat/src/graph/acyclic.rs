use crate::error::{Error, Result};
use crate::mdp::Mdp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AcyclicCheck {
    /// Topological order of the non-trap states.
    Order(Vec<usize>),
    /// A cycle among non-trap states, first state repeated at the end.
    Cycle(Vec<usize>),
}

/// Checks that the graph restricted to non-trap states is acyclic.
pub fn acyclic_check(m: &Mdp) -> AcyclicCheck {
    let n = m.n_states();
    let trap: Vec<bool> = (0..n).map(|s| m.is_trap(s)).collect();
    let succ = |s: usize| -> Vec<usize> {
        let mut v: Vec<usize> =
            m.actions(s).iter().flat_map(|a| a.transitions.iter().map(|t| t.to)).filter(|&t| !trap[t]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    // 0 = unvisited, 1 = on stack, 2 = finished
    let mut color = vec![0u8; n];
    let mut post = Vec::new();
    for root in 0..n {
        if trap[root] || color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(root, succ(root), 0)];
        color[root] = 1;
        while let Some((s, ss, i)) = stack.last_mut() {
            if *i < ss.len() {
                let t = ss[*i];
                *i += 1;
                match color[t] {
                    0 => {
                        color[t] = 1;
                        let st = succ(t);
                        stack.push((t, st, 0));
                    }
                    1 => {
                        let pos = stack.iter().position(|(x, _, _)| *x == t).unwrap();
                        let mut cyc: Vec<usize> = stack[pos..].iter().map(|(x, _, _)| *x).collect();
                        cyc.push(t);
                        return AcyclicCheck::Cycle(cyc);
                    }
                    _ => {}
                }
            } else {
                color[*s] = 2;
                post.push(*s);
                stack.pop();
            }
        }
    }
    post.reverse();
    AcyclicCheck::Order(post)
}

pub fn require_acyclic(m: &Mdp) -> Result<Vec<usize>> {
    match acyclic_check(m) {
        AcyclicCheck::Order(o) => Ok(o),
        AcyclicCheck::Cycle(c) => Err(Error::NotAcyclic(c.iter().map(|&s| m.id(s).to_string()).collect())),
    }
}
