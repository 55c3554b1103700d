//! Counter-based random number generation.
//!
//! Every consumer draws from a `CounterRng` keyed by `(seed, stream)`, where
//! the stream id is a node index, path index, or task index. The mapping
//! `(seed, stream, counter) -> u64` is a pure function, so output never
//! depends on scheduling or iteration order and reruns are bit-identical
//! across thread counts.

/// Splitmix64-style counter generator.
///
/// Each `(seed, stream)` pair owns an independent sequence; `next_u64`
/// advances a local counter through the splitmix64 finalizer.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
    counter: u64,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        // Decorrelate the stream id from the seed before counting.
        let state = mix(seed ^ mix(stream.wrapping_mul(GOLDEN).wrapping_add(GOLDEN)));
        CounterRng { state, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.state.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in (0, 1); the top 53 bits give a dyadic rational, shifted
    /// away from exactly 0 so logarithms stay finite.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        let u = (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        if u == 0.0 {
            0.5 * (1.0 / 9007199254740992.0)
        } else {
            u
        }
    }

    /// Standard normal via Box-Muller; both branches are consumed so one
    /// gaussian costs one transcendental pair every second call.
    #[inline]
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        (r * phi.cos(), r * phi.sin())
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.normal_pair().0
    }
}

/// A stream of standard normals that caches the second Box-Muller branch.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: CounterRng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        NormalStream {
            rng: CounterRng::new(seed, stream),
            spare: None,
        }
    }

    #[inline]
    pub fn next(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let (a, b) = self.rng.normal_pair();
        self.spare = Some(b);
        a
    }
}
