//! Error-detector building blocks: correlation manipulation (synchronizer,
//! shuffle buffer) and the stochastic arithmetic that measures deviation
//! (absolute subtractor, squarer, comparator), plus the FSM scaled adder.

use rand::Rng;

use crate::bitstream::{ensure_same_length, Bitstream};
use crate::error::{Error, Result};

/// Three-state chain. `Balanced` is the middle state; the outer states
/// each hold one withheld `1` from the first or the second stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynchronizerState {
    /// A `1` of the second stream is pending.
    S0,
    #[default]
    S1,
    /// A `1` of the first stream is pending.
    S2,
}

#[derive(Debug, Clone, Default)]
pub struct Synchronizer {
    state: SynchronizerState,
}

impl Synchronizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> SynchronizerState {
        self.state
    }

    /// One clock. Equal bits pass through. A dissimilar pair in the middle
    /// state is emitted as `00` and the `1` is withheld; the opposite
    /// dissimilar pair in an outer state releases it as `11`. A dissimilar
    /// pair that would need a second withheld bit passes unchanged.
    pub fn step(&mut self, x: bool, y: bool) -> (bool, bool) {
        use SynchronizerState::*;
        if x == y {
            return (x, y);
        }
        match (self.state, x) {
            (S1, true) => {
                self.state = S2;
                (false, false)
            }
            (S1, false) => {
                self.state = S0;
                (false, false)
            }
            (S2, false) | (S0, true) => {
                self.state = S1;
                (true, true)
            }
            // saturated: stall
            (S2, true) | (S0, false) => (x, y),
        }
    }
}

/// Pairs up ones of the two streams, raising their correlation while
/// keeping both ones counts. A bit still withheld at the end of the
/// stream is returned at the position where it was absorbed.
pub fn synchronize(x: &Bitstream, y: &Bitstream) -> Result<(Bitstream, Bitstream)> {
    ensure_same_length(x, y)?;
    let mut fsm = Synchronizer::new();
    let mut ox = Vec::with_capacity(x.len());
    let mut oy = Vec::with_capacity(y.len());
    let mut pending_at = None;
    for (i, (&a, &b)) in x.bits().iter().zip(y.bits()).enumerate() {
        let before = fsm.state();
        let (p, q) = fsm.step(a, b);
        if before == SynchronizerState::S1 && fsm.state() != SynchronizerState::S1 {
            pending_at = Some(i);
        } else if fsm.state() == SynchronizerState::S1 {
            pending_at = None;
        }
        ox.push(p);
        oy.push(q);
    }
    if let Some(i) = pending_at {
        match fsm.state() {
            SynchronizerState::S2 => ox[i] = true,
            SynchronizerState::S0 => oy[i] = true,
            SynchronizerState::S1 => {}
        }
    }
    Ok((Bitstream::from_bits(ox)?, Bitstream::from_bits(oy)?))
}

/// Register buffer that emits a randomly addressed stored bit and stores the
/// incoming bit in its place.
#[derive(Debug, Clone)]
pub struct ShuffleBuffer {
    depth: usize,
}

impl Default for ShuffleBuffer {
    fn default() -> Self {
        Self { depth: 3 }
    }
}

impl ShuffleBuffer {
    pub fn new(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument(
                "shuffle buffer depth must be positive".into(),
            ));
        }
        Ok(Self { depth })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Runs the whole stream through the buffer, treating it as periodic:
    /// the registers start out holding the last `depth` bits, and are
    /// drained in random order after the remaining bits have passed. Output
    /// and input have the same length and ones count, and an output bit is
    /// never the input bit of the same clock before the drain.
    pub fn run<R: Rng + ?Sized>(&self, x: &Bitstream, rng: &mut R) -> Bitstream {
        let bits = x.bits();
        let split = bits.len() - self.depth.min(bits.len());
        let mut regs: Vec<bool> = bits[split..].to_vec();
        let mut out = Vec::with_capacity(bits.len());
        for &b in &bits[..split] {
            let addr = rng.gen_range(0..regs.len());
            out.push(regs[addr]);
            regs[addr] = b;
        }
        while !regs.is_empty() {
            let addr = rng.gen_range(0..regs.len());
            out.push(regs.swap_remove(addr));
        }
        Bitstream::from_bits(out).expect("non-empty input")
    }
}

/// Decorrelates a stream from itself with a default three-register buffer.
pub fn shuffle<R: Rng + ?Sized>(x: &Bitstream, rng: &mut R) -> Bitstream {
    ShuffleBuffer::default().run(x, rng)
}

/// `|p_x - p_y|` for positively correlated inputs.
pub fn xor_subtract(x: &Bitstream, y: &Bitstream) -> Result<Bitstream> {
    x.xor(y)
}

/// `p_x^2` via an AND of the stream and its shuffled copy.
pub fn square<R: Rng + ?Sized>(x: &Bitstream, rng: &mut R) -> Bitstream {
    shuffle(x, rng).and(x).expect("shuffle preserves length")
}

/// `max(mse - delta, 0)` for synchronized inputs: AND with the threshold
/// stream inverted.
pub fn comparator(mse: &Bitstream, delta: &Bitstream) -> Result<Bitstream> {
    mse.zip_with(delta, |m, d| m & !d)
}

/// Scaled adder FSM. Equal input bits are passed through; on unequal bits
/// the stored bit `Q` is emitted and toggled.
#[derive(Debug, Clone, Default)]
pub struct AdderFsm {
    q: bool,
}

impl AdderFsm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn q(&self) -> bool {
        self.q
    }

    pub fn step(&mut self, a: bool, b: bool) -> bool {
        if a == b {
            a
        } else {
            let out = self.q;
            self.q = !self.q;
            out
        }
    }
}

/// `(p_a + p_b) / 2` by the FSM adder.
pub fn fsm_add(a: &Bitstream, b: &Bitstream) -> Result<Bitstream> {
    Ok(fsm_add_with_select(a, b)?.0)
}

/// FSM adder output together with the select stream of the multiplexer it
/// is equivalent to (select 0 routes `a`, select 1 routes `b`).
pub fn fsm_add_with_select(a: &Bitstream, b: &Bitstream) -> Result<(Bitstream, Bitstream)> {
    ensure_same_length(a, b)?;
    let mut fsm = AdderFsm::new();
    let mut out = Vec::with_capacity(a.len());
    let mut sel = Vec::with_capacity(a.len());
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        let q = fsm.q();
        let z = fsm.step(x, y);
        out.push(z);
        // unequal inputs: pick the input that carries z; equal: follow Q
        sel.push(if x == y { q } else { y == z });
    }
    Ok((Bitstream::from_bits(out)?, Bitstream::from_bits(sel)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::scc;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bs(s: &str) -> Bitstream {
        s.parse().unwrap()
    }

    #[test]
    fn synchronizer_passes_equal_streams() {
        let x = bs("0110100111010010");
        assert_eq!(synchronize(&x, &x).unwrap(), (x.clone(), x));
    }

    #[test]
    fn synchronizer_transition_table() {
        let mut s = Synchronizer::new();
        assert_eq!(s.step(true, false), (false, false));
        assert_eq!(s.state(), SynchronizerState::S2);
        assert_eq!(s.step(true, false), (true, false));
        assert_eq!(s.state(), SynchronizerState::S2);
        assert_eq!(s.step(false, true), (true, true));
        assert_eq!(s.state(), SynchronizerState::S1);
        assert_eq!(s.step(false, true), (false, false));
        assert_eq!(s.state(), SynchronizerState::S0);
        assert_eq!(s.step(true, false), (true, true));
    }

    #[test]
    fn synchronizer_flushes_pending_bit() {
        let (x, y) = synchronize(&bs("0001"), &bs("0000")).unwrap();
        assert_eq!(x.count_ones(), 1);
        assert_eq!(y.count_ones(), 0);
    }

    #[test]
    fn complementary_streams_become_correlated() {
        let x = bs("1010101010101010");
        let y = x.not();
        let (a, b) = synchronize(&x, &y).unwrap();
        assert_eq!(a.count_ones(), 8);
        assert_eq!(b.count_ones(), 8);
        assert_eq!(scc(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn shuffle_all_ones_and_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ones = Bitstream::ones(64);
        assert_eq!(shuffle(&ones, &mut rng), ones);
        let x = bs("1100101011110000");
        let y = ShuffleBuffer::new(5).unwrap().run(&x, &mut rng);
        assert_eq!(y.count_ones(), x.count_ones());
        assert_eq!(y.len(), x.len());
        assert!(ShuffleBuffer::new(0).is_err());
        let short = bs("10");
        assert_eq!(shuffle(&short, &mut rng).count_ones(), 1);
    }

    #[test]
    fn subtractor_identities() {
        let x = bs("0110100111");
        assert_eq!(xor_subtract(&x, &x).unwrap().count_ones(), 0);
        assert_eq!(xor_subtract(&x, &Bitstream::zeros(10)).unwrap(), x);
    }

    #[test]
    fn comparator_zero_input() {
        let z = Bitstream::zeros(8);
        assert_eq!(comparator(&z, &bs("01010101")).unwrap(), z);
        assert_eq!(comparator(&bs("1110"), &bs("1000")).unwrap(), bs("0110"));
    }

    #[test]
    fn adder_degenerate_inputs() {
        let a = bs("0110100111");
        assert_eq!(fsm_add(&a, &a).unwrap(), a);
        let sum = fsm_add(&Bitstream::ones(9), &Bitstream::zeros(9)).unwrap();
        assert!((sum.value() - 0.5).abs() <= 1.0 / 9.0);
    }

    #[test]
    fn adder_select_reproduces_output() {
        let a = bs("1000001101");
        let b = bs("0111110001");
        let (z, s) = fsm_add_with_select(&a, &b).unwrap();
        for i in 0..a.len() {
            let routed = if s.bits()[i] {
                b.bits()[i]
            } else {
                a.bits()[i]
            };
            assert_eq!(routed, z.bits()[i]);
        }
    }
}
