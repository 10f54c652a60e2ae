//! Reference circuits shipped with the crate.

use super::{parse_netlist, Netlist};

pub const FIG7: &str = include_str!("../../fixtures/fig7.net");
pub const FIG9: &str = include_str!("../../fixtures/fig9.net");
pub const FIG10: &str = include_str!("../../fixtures/fig10.net");

/// Two-input multilevel circuit.
pub fn fig7() -> Netlist {
    parse_netlist(FIG7).expect("bundled netlist parses")
}

/// Single-output benchmark.
pub fn fig9() -> Netlist {
    parse_netlist(FIG9).expect("bundled netlist parses")
}

/// Two-output benchmark.
pub fn fig10() -> Netlist {
    parse_netlist(FIG10).expect("bundled netlist parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        assert_eq!(fig7().circuit.depth(), 3);
        assert_eq!(fig9().circuit.depth(), 3);
        assert_eq!(fig10().circuit.outputs().len(), 2);
    }
}
