use crate::error::{KdvError, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Field {
    Theta,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum End {
    Left,
    Right,
}

/// The functional (field)^{(order)}(end).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraceFunctional {
    pub field: Field,
    pub order: u32,
    pub end: End,
}

impl TraceFunctional {
    pub const fn new(field: Field, order: u32, end: End) -> Self {
        TraceFunctional { field, order, end }
    }

    pub fn label(&self) -> String {
        let f = match self.field {
            Field::Theta => "theta",
            Field::U => "u",
        };
        let p = "'".repeat(self.order as usize);
        let e = match self.end {
            End::Left => "0",
            End::Right => "L",
        };
        format!("{f}{p}({e})")
    }
}

use End::{Left, Right};
use Field::{Theta, U};

const TX_L: TraceFunctional = TraceFunctional::new(Theta, 1, Right);
const TXX_0: TraceFunctional = TraceFunctional::new(Theta, 2, Left);
const TXX_L: TraceFunctional = TraceFunctional::new(Theta, 2, Right);
const UX_0: TraceFunctional = TraceFunctional::new(U, 1, Left);
const UXX_0: TraceFunctional = TraceFunctional::new(U, 2, Left);
const UXX_L: TraceFunctional = TraceFunctional::new(U, 2, Right);

pub const BASE_CONDITIONS: [TraceFunctional; 6] = [
    TraceFunctional::new(Theta, 0, Left),
    TraceFunctional::new(Theta, 0, Right),
    TraceFunctional::new(Theta, 1, Left),
    TraceFunctional::new(U, 0, Left),
    TraceFunctional::new(U, 0, Right),
    TraceFunctional::new(U, 1, Right),
];

/// One boundary-control configuration: the base adjoint conditions plus the
/// traces that must vanish for an unobservable eigenmode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseSpec {
    pub id: u8,
    pub extras: Vec<TraceFunctional>,
}

impl CaseSpec {
    pub fn new(id: u8) -> Result<Self> {
        let extras = match id {
            1 => vec![TX_L],
            2 => vec![TXX_L],
            3 => vec![TXX_0],
            4 => vec![TX_L, UX_0],
            5 => vec![TXX_L, UXX_L],
            6 => vec![TX_L, UXX_L],
            7 => vec![TX_L, TXX_L],
            8 => vec![TX_L, UXX_0],
            9 => vec![TX_L, TXX_0],
            10 => vec![TXX_L, UXX_0],
            11 => vec![TXX_L, TXX_0],
            12 => vec![TXX_0, UXX_L],
            _ => return Err(KdvError::validation(format!("case id {id} outside 1..12"))),
        };
        Ok(CaseSpec { id, extras })
    }

    pub fn all() -> Vec<CaseSpec> {
        (1..=12).map(|id| CaseSpec::new(id).unwrap()).collect()
    }

    /// Base rows followed by the extras, without repetition.
    pub fn rows(&self) -> Vec<TraceFunctional> {
        let mut rows = BASE_CONDITIONS.to_vec();
        for e in &self.extras {
            if !rows.contains(e) {
                rows.push(*e);
            }
        }
        rows
    }

    /// Traces observed by the Gramian of this case.
    pub fn observed(&self) -> &[TraceFunctional] {
        &self.extras
    }
}
