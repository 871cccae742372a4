//! Compensated and exact summation helpers.

/// Neumaier (improved Kahan) compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Compensated mean of a slice.
pub fn compensated_mean(values: &[f64]) -> f64 {
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Error-free sum of two f64s: returns (hi, lo) with hi + lo == a + b exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Exact running sum held as a Shewchuk expansion: a list of nonoverlapping
/// f64 components in increasing magnitude whose exact sum is the value.
/// Adding (or subtracting) a single f64 is error-free, which makes the
/// Gray-code subset-sum walk exact regardless of path.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    components: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum { components: Vec::with_capacity(8) }
    }

    /// Grow-expansion with zero elimination.
    pub fn add(&mut self, value: f64) {
        let mut q = value;
        let mut out = Vec::with_capacity(self.components.len() + 1);
        for &c in &self.components {
            let (s, e) = two_sum(q, c);
            if e != 0.0 {
                out.push(e);
            }
            q = s;
        }
        if q != 0.0 {
            out.push(q);
        }
        self.components = out;
    }

    pub fn sub(&mut self, value: f64) {
        self.add(-value);
    }

    /// Exact sign of the represented value: -1, 0, or +1. The last component
    /// dominates the rest in magnitude, so its sign is the sign of the sum.
    pub fn sign(&self) -> i32 {
        match self.components.last() {
            None => 0,
            Some(&c) if c > 0.0 => 1,
            Some(&c) if c < 0.0 => -1,
            _ => 0,
        }
    }

    /// Best f64 approximation of the exact value.
    pub fn approx(&self) -> f64 {
        self.components.iter().sum()
    }
}
