use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::real::Real;
use crate::rng::SeededRng;

/// Added to the gate normaliser so the bound `max |a| < 1/4` is strict.
pub const GATE_EPSILON: f64 = 1e-12;

/// Per-channel projection vectors that generate the per-node coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamWeights<T = f64> {
    pub gate: Vec<T>,
    pub input: Vec<T>,
    pub output: Vec<T>,
}

impl<T: Real> ParamWeights<T> {
    /// Entries uniform in `[-1, 1)`, drawn gate, input, output in turn.
    pub fn random(channels: usize, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed);
        Self {
            gate: rng.vec(channels, -1.0, 1.0),
            input: rng.vec(channels, -1.0, 1.0),
            output: rng.vec(channels, -1.0, 1.0),
        }
    }
}

/// Per-node scalar coefficients shared across channels.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanParams<T = f64> {
    /// Gate weighting a node's state when it flows to or from its parent.
    pub a_bar: Vec<T>,
    /// Input gain.
    pub b_bar: Vec<T>,
    /// Output gain.
    pub c_out: Vec<T>,
    /// Set once `normalize_gates` has run.
    pub normalized: bool,
}

impl<T: Real> ScanParams<T> {
    pub fn new(a_bar: Vec<T>, b_bar: Vec<T>, c_out: Vec<T>) -> Result<Self> {
        if a_bar.len() != b_bar.len() || a_bar.len() != c_out.len() {
            return Err(Error::Dimension(format!(
                "coefficient lengths differ: {}, {}, {}",
                a_bar.len(),
                b_bar.len(),
                c_out.len()
            )));
        }
        if a_bar.iter().chain(&b_bar).chain(&c_out).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite scan coefficient".into()));
        }
        Ok(Self { a_bar, b_bar, c_out, normalized: false })
    }

    /// Constant coefficients, already marked normalised. Panics if
    /// `|a| >= 1/4`.
    pub fn uniform(node_count: usize, a: T, b: T, c: T) -> Self {
        assert!(a.abs() < T::lit(0.25), "uniform gate must satisfy |a| < 1/4");
        Self { a_bar: vec![a; node_count], b_bar: vec![b; node_count], c_out: vec![c; node_count], normalized: true }
    }

    pub fn node_count(&self) -> usize {
        self.a_bar.len()
    }

    pub fn max_abs_gate(&self) -> T {
        self.a_bar.iter().fold(T::zero(), |m, a| m.max(a.abs()))
    }

    pub(crate) fn check_nodes(&self, node_count: usize) -> Result<()> {
        if self.node_count() != node_count {
            return Err(Error::Dimension(format!(
                "parameters cover {} nodes, grid has {node_count}",
                self.node_count()
            )));
        }
        Ok(())
    }
}

/// Selective coefficients: `a_i = tanh(w_a . x_i)`, `b_i = w_b . x_i`,
/// `c_i = w_c . x_i`.
pub fn make_params<T: Real>(map: &FeatureMap<T>, weights: &ParamWeights<T>) -> Result<ScanParams<T>> {
    let ch = map.channels();
    for (name, w) in [("gate", &weights.gate), ("input", &weights.input), ("output", &weights.output)] {
        if w.len() != ch {
            return Err(Error::Dimension(format!("{name} weights have length {}, map has {ch} channels", w.len())));
        }
    }
    let dot = |w: &[T], x: &[T]| w.iter().zip(x).fold(T::zero(), |s, (&a, &b)| s + a * b);
    let n = map.node_count();
    let (mut a, mut b, mut c) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let x = map.node(i);
        a.push(dot(&weights.gate, x).tanh());
        b.push(dot(&weights.input, x));
        c.push(dot(&weights.output, x));
    }
    ScanParams::new(a, b, c)
}

/// Scales the gates by `1 / (4 max|a| + eps)`, bringing every gate strictly
/// inside `(-1/4, 1/4)`. All-zero gates are left unchanged.
pub fn normalize_gates<T: Real>(mut params: ScanParams<T>) -> ScanParams<T> {
    let peak = params.max_abs_gate();
    if peak > T::zero() {
        let four_peak = T::lit(4.0) * peak;
        let mut denom = four_peak + T::lit(GATE_EPSILON);
        if denom == four_peak {
            // eps below the type's resolution at this magnitude
            denom = four_peak * (T::one() + T::lit(2.0) * T::epsilon());
        }
        params.a_bar.iter_mut().for_each(|a| *a /= denom);
    }
    params.normalized = true;
    params
}
