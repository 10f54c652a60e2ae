//! 2:1 multiplexer on bitstreams and the exactness conditions for MUX
//! scaled addition and subtraction.

use crate::bitstream::{ensure_same_length, Bitstream};
use crate::error::Result;

/// Position counts of each `(s, a, b)` combination; index `s<<2 | a<<1 | b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MuxTally {
    pub counts: [usize; 8],
}

impl MuxTally {
    pub fn of(a: &Bitstream, b: &Bitstream, s: &Bitstream) -> Result<Self> {
        ensure_same_length(a, b)?;
        ensure_same_length(a, s)?;
        let mut counts = [0usize; 8];
        for ((&x, &y), &z) in a.bits().iter().zip(b.bits()).zip(s.bits()) {
            counts[(z as usize) << 2 | (x as usize) << 1 | y as usize] += 1;
        }
        Ok(Self { counts })
    }

    /// Count for the combination written as `s a b`, e.g. `i(0, 1, 0)`.
    pub fn i(&self, s: u8, a: u8, b: u8) -> usize {
        self.counts[(s as usize) << 2 | (a as usize) << 1 | b as usize]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// `z = !s & a | s & b`.
pub fn mux(a: &Bitstream, b: &Bitstream, s: &Bitstream) -> Result<Bitstream> {
    ensure_same_length(a, b)?;
    ensure_same_length(a, s)?;
    let bits = a
        .bits()
        .iter()
        .zip(b.bits())
        .zip(s.bits())
        .map(|((&x, &y), &sel)| if sel { y } else { x })
        .collect();
    Bitstream::from_bits(bits)
}

/// Whether the MUX output equals `(p_a + p_b) / 2` exactly:
/// `i001 + i110 = i010 + i101`.
pub fn mux_add_condition(a: &Bitstream, b: &Bitstream, s: &Bitstream) -> Result<(bool, MuxTally)> {
    let t = MuxTally::of(a, b, s)?;
    let holds = t.i(0, 0, 1) + t.i(1, 1, 0) == t.i(0, 1, 0) + t.i(1, 0, 1);
    Ok((holds, t))
}

/// Whether the MUX output equals `(p_a + 1 - p_b) / 2` exactly:
/// `(i100 + i000)/2 + i110 = i101 + (i011 + i111)/2`, compared in doubled
/// counts.
pub fn mux_sub_condition(a: &Bitstream, b: &Bitstream, s: &Bitstream) -> Result<(bool, MuxTally)> {
    let t = MuxTally::of(a, b, s)?;
    let lhs = t.i(1, 0, 0) + t.i(0, 0, 0) + 2 * t.i(1, 1, 0);
    let rhs = 2 * t.i(1, 0, 1) + t.i(0, 1, 1) + t.i(1, 1, 1);
    Ok((lhs == rhs, t))
}
