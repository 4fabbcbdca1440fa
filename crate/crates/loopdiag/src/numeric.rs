//! Small numeric utilities: compensated summation and 2x2 eigenpairs.

/// Neumaier-compensated accumulator. Keeps identity checks meaningful at the
/// 1e-8..1e-12 tolerances used throughout even for long config sweeps.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Eigenvalues of a real 2x2 matrix `[[a, b], [c, d]]`, ordered by
/// descending magnitude. Returns `None` for complex eigenvalues.
pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> Option<(f64, f64)> {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let l1 = if tr >= 0.0 {
        (tr + root) / 2.0
    } else {
        (tr - root) / 2.0
    };
    // The smaller root from the product avoids cancellation.
    let l2 = if l1 == 0.0 { tr - l1 } else { det / l1 };
    if l1.abs() >= l2.abs() {
        Some((l1, l2))
    } else {
        Some((l2, l1))
    }
}

/// Relative error with an absolute floor of 1 in the denominator, used for
/// "to tolerance" checks on quantities that may legitimately be near zero.
pub fn mixed_error(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(1.0)
}

/// Plain relative error.
pub fn rel_error(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs()
}
