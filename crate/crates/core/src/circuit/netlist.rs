//! Line-oriented netlist format.
//!
//! ```text
//! # comment
//! input a 0.3
//! input b 0.6
//! corr a b 0.5            # optional input correlation
//! gate G1 AND a b
//! gate G2 MUX2 a b G1     # operands, then select
//! output z G2
//! fault G1 0.125
//! ```
//!
//! Keywords and gate kinds are case-insensitive; names are not. Gates may
//! be listed in any order.

use std::str::FromStr;

use super::{Circuit, CircuitBuilder, FaultMap};
use crate::error::{Error, Result};
use crate::ptm::GateKind;

#[derive(Debug, Clone)]
pub struct Netlist {
    pub circuit: Circuit,
    pub faults: FaultMap,
}

impl FromStr for Netlist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_netlist(s)
    }
}

pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut b = CircuitBuilder::new();
    let mut faults = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let err = |msg: String| Error::Parse { line, msg };
        let body = raw.split('#').next().unwrap_or("");
        let tok: Vec<&str> = body.split_whitespace().collect();
        let Some(&head) = tok.first() else { continue };
        let num = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|_| err(format!("{what} `{s}` is not a number")))
        };
        let expect = |n: usize, usage: &str| {
            if tok.len() == n {
                Ok(())
            } else {
                Err(err(format!("expected `{usage}`")))
            }
        };
        match head.to_ascii_lowercase().as_str() {
            "input" => {
                expect(3, "input <name> <prob>")?;
                let p = num(tok[2], "probability")?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(err(format!("probability {p} outside [0, 1]")));
                }
                b = b.input(tok[1], p);
            }
            "gate" => {
                if tok.len() < 4 {
                    return Err(err("expected `gate <id> <kind> <sources...>`".into()));
                }
                let kind: GateKind = tok[2].parse().map_err(|e: Error| err(e.to_string()))?;
                if tok.len() - 3 != kind.arity() {
                    return Err(err(format!(
                        "{kind} takes {} sources, got {}",
                        kind.arity(),
                        tok.len() - 3
                    )));
                }
                b = b.gate(tok[1], kind, &tok[3..]);
            }
            "output" => {
                expect(3, "output <name> <source>")?;
                b = b.output(tok[1], tok[2]);
            }
            "fault" => {
                expect(3, "fault <gate> <p_e>")?;
                faults.push((line, tok[1].to_string(), num(tok[2], "error rate")?));
            }
            "corr" => {
                expect(4, "corr <input> <input> <scc>")?;
                b = b.correlate(tok[1], tok[2], num(tok[3], "correlation")?);
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    let circuit = b.build()?;
    let mut map = FaultMap::new();
    for (line, id, p_e) in faults {
        if circuit.gate_index(&id).is_none() {
            return Err(Error::Parse {
                line,
                msg: format!("fault on unknown gate `{id}`"),
            });
        }
        map.insert(&id, p_e).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
    }
    Ok(Netlist {
        circuit,
        faults: map,
    })
}
