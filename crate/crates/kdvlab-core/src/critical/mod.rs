//! Critical-length sets and per-case criticality verdicts.

mod lattice;
mod transcendental;
mod verdict;

pub use lattice::{enum_lattice_set, lattice_value, member_lattice, n_witness, LatticeParams, Membership, NWitness};
pub use transcendental::{
    g_function, g_system, solve_transcendental_set, Branch, GWitness, Rejection, RejectReason, SearchBox,
    TranscendentalScan,
};
pub use verdict::{case_sets, criticality, CaseVerdict, GCache};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SetTag {
    N,
    N3,
    R,
    G,
    Gprime,
}

impl SetTag {
    pub fn name(self) -> &'static str {
        match self {
            SetTag::N => "N",
            SetTag::N3 => "N3",
            SetTag::R => "R",
            SetTag::G => "G",
            SetTag::Gprime => "Gprime",
        }
    }

    pub fn parse(s: &str) -> Option<SetTag> {
        match s {
            "N" => Some(SetTag::N),
            "N3" => Some(SetTag::N3),
            "R" => Some(SetTag::R),
            "G" => Some(SetTag::G),
            "Gprime" | "G'" => Some(SetTag::Gprime),
            _ => None,
        }
    }

    pub fn is_lattice(self) -> bool {
        matches!(self, SetTag::N | SetTag::N3 | SetTag::R)
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum Witness {
    Lattice(LatticeParams),
    Transcendental(GWitness),
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalLength {
    pub value: f64,
    pub tag: SetTag,
    pub witness: Witness,
}

impl CriticalLength {
    /// Length recomputed from the witness alone.
    pub fn recompute(&self) -> f64 {
        match &self.witness {
            Witness::Lattice(w) => lattice_value(self.tag, *w),
            Witness::Transcendental(g) => g.length(),
        }
    }

    /// CSV row `L,set,k,l,re_a,im_a,re_b,im_b,residual`.
    pub fn csv_row(&self) -> Vec<String> {
        let f = |x: f64| format!("{:.16e}", x);
        match &self.witness {
            Witness::Lattice(w) => vec![
                f(self.value),
                self.tag.name().into(),
                w.k.to_string(),
                w.l.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
            Witness::Transcendental(g) => vec![
                f(self.value),
                self.tag.name().into(),
                String::new(),
                String::new(),
                f(g.a.re),
                f(g.a.im),
                f(g.b.re),
                f(g.b.im),
                f(g.residual),
            ],
        }
    }
}

pub const CSV_HEADER: [&str; 9] = ["L", "set", "k", "l", "re_a", "im_a", "re_b", "im_b", "residual"];
