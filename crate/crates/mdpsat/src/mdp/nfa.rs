use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Boolean formula over atomic propositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    True,
    False,
    Prop(String),
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
}

impl Guard {
    pub fn eval(&self, labels: &BTreeSet<String>) -> bool {
        match self {
            Guard::True => true,
            Guard::False => false,
            Guard::Prop(p) => labels.contains(p),
            Guard::Not(g) => !g.eval(labels),
            Guard::And(a, b) => a.eval(labels) && b.eval(labels),
            Guard::Or(a, b) => a.eval(labels) || b.eval(labels),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Guard::Or(..) => 0,
            Guard::And(..) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, g: &Guard, min: u8| {
            if g.prec() < min {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        };
        match self {
            Guard::True => write!(f, "true"),
            Guard::False => write!(f, "false"),
            Guard::Prop(p) => write!(f, "{p}"),
            Guard::Not(g) => {
                write!(f, "!")?;
                wrap(f, g, 2)
            }
            Guard::And(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " & ")?;
                wrap(f, b, 2)
            }
            Guard::Or(a, b) => {
                wrap(f, a, 0)?;
                write!(f, " | ")?;
                wrap(f, b, 1)
            }
        }
    }
}

struct GuardParser<'a> {
    toks: Vec<&'a str>,
    pos: usize,
}

fn tokenize(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if b"&|!()".contains(&c) {
            out.push(&s[i..i + 1]);
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == b'_' {
            let j = (i..bytes.len()).find(|&j| !(bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_')).unwrap_or(bytes.len());
            out.push(&s[i..j]);
            i = j;
        } else {
            return Err(Error::MalformedDocument(format!("unexpected character {:?} in guard {s:?}", c as char)));
        }
    }
    Ok(out)
}

impl GuardParser<'_> {
    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).copied()
    }
    fn bump(&mut self) -> Option<&str> {
        let t = self.toks.get(self.pos).copied();
        self.pos += 1;
        t
    }
    fn or(&mut self) -> Result<Guard> {
        let mut g = self.and()?;
        while self.peek() == Some("|") {
            self.bump();
            g = Guard::Or(Box::new(g), Box::new(self.and()?));
        }
        Ok(g)
    }
    fn and(&mut self) -> Result<Guard> {
        let mut g = self.unary()?;
        while self.peek() == Some("&") {
            self.bump();
            g = Guard::And(Box::new(g), Box::new(self.unary()?));
        }
        Ok(g)
    }
    fn unary(&mut self) -> Result<Guard> {
        match self.bump() {
            Some("!") => Ok(Guard::Not(Box::new(self.unary()?))),
            Some("(") => {
                let g = self.or()?;
                if self.bump() != Some(")") {
                    return Err(Error::MalformedDocument("unbalanced parenthesis in guard".into()));
                }
                Ok(g)
            }
            Some("true") => Ok(Guard::True),
            Some("false") => Ok(Guard::False),
            Some(t) if !"&|)".contains(t) => Ok(Guard::Prop(t.to_string())),
            t => Err(Error::MalformedDocument(format!("unexpected token {t:?} in guard"))),
        }
    }
}

pub fn parse_guard(s: &str) -> Result<Guard> {
    let mut p = GuardParser { toks: tokenize(s)?, pos: 0 };
    let g = p.or()?;
    if p.pos != p.toks.len() {
        return Err(Error::MalformedDocument(format!("trailing input in guard {s:?}")));
    }
    Ok(g)
}

/// Automaton over label sets; a word is accepted once some run visits an accepting state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    pub states: Vec<String>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub transitions: Vec<(usize, Guard, usize)>,
}

impl Nfa {
    pub fn start(&self) -> BTreeSet<usize> {
        BTreeSet::from([self.initial])
    }

    pub fn step(&self, current: &BTreeSet<usize>, letter: &BTreeSet<String>) -> BTreeSet<usize> {
        self.transitions
            .iter()
            .filter(|(from, g, _)| current.contains(from) && g.eval(letter))
            .map(|(_, _, to)| *to)
            .collect()
    }

    pub fn hits_accepting(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().any(|s| self.accepting.contains(s))
    }

    /// Whether some prefix of `word` is a good prefix.
    pub fn accepts(&self, word: &[BTreeSet<String>]) -> bool {
        let mut cur = self.start();
        if self.hits_accepting(&cur) {
            return true;
        }
        for letter in word {
            cur = self.step(&cur, letter);
            if self.hits_accepting(&cur) {
                return true;
            }
            if cur.is_empty() {
                return false;
            }
        }
        false
    }
}

#[derive(Debug, Default)]
pub struct NfaBuilder {
    states: Vec<String>,
    index: HashMap<String, usize>,
    accepting: BTreeSet<usize>,
    transitions: Vec<(usize, Guard, usize)>,
}

impl NfaBuilder {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn state(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        self.states.push(id.to_string());
        self.index.insert(id.to_string(), self.states.len() - 1);
        self.states.len() - 1
    }
    pub fn accepting(&mut self, id: &str) {
        let s = self.state(id);
        self.accepting.insert(s);
    }
    pub fn edge(&mut self, from: &str, guard: &str, to: &str) -> Result<()> {
        let g = parse_guard(guard)?;
        let f = self.state(from);
        let t = self.state(to);
        self.transitions.push((f, g, t));
        Ok(())
    }
    pub fn build(self, initial: &str) -> Result<Nfa> {
        let initial =
            *self.index.get(initial).ok_or_else(|| Error::UnknownStateReference(initial.to_string()))?;
        Ok(Nfa { states: self.states, initial, accepting: self.accepting, transitions: self.transitions })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocEdge {
    from: String,
    guard: String,
    to: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocNfa {
    states: Vec<String>,
    initial: String,
    accepting: Vec<String>,
    transitions: Vec<DocEdge>,
}

pub fn parse_nfa(doc: &[u8]) -> Result<Nfa> {
    let d: DocNfa = serde_json::from_slice(doc).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    let mut b = NfaBuilder::new();
    for s in &d.states {
        b.state(s);
    }
    let known = |id: &str| {
        if d.states.iter().any(|s| s == id) {
            Ok(())
        } else {
            Err(Error::UnknownStateReference(id.to_string()))
        }
    };
    for a in &d.accepting {
        known(a)?;
        b.accepting(a);
    }
    for e in &d.transitions {
        known(&e.from)?;
        known(&e.to)?;
        b.edge(&e.from, &e.guard, &e.to)?;
    }
    known(&d.initial)?;
    b.build(&d.initial)
}

pub fn serialize_nfa(a: &Nfa) -> Vec<u8> {
    let doc = DocNfa {
        states: a.states.clone(),
        initial: a.states[a.initial].clone(),
        accepting: a.accepting.iter().map(|&s| a.states[s].clone()).collect(),
        transitions: a
            .transitions
            .iter()
            .map(|(f, g, t)| DocEdge { from: a.states[*f].clone(), guard: g.to_string(), to: a.states[*t].clone() })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("serializable");
    out.push(b'\n');
    out
}
