use std::collections::BTreeMap;

use num_complex::Complex;

use crate::scalar::{czero, Real};

/// Result of one named consistency check.
///
/// `passed` is always `deviation <= tol`; the constructor enforces it.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport<T: Real> {
    pub name: String,
    pub deviation: T,
    /// Recovered proportionality scalar, zero for checks without one.
    pub lambda: Complex<T>,
    pub tol: T,
    pub passed: bool,
    /// Parameters the check was run at, keyed for deterministic ordering.
    pub context: BTreeMap<String, String>,
}

impl<T: Real> VerificationReport<T> {
    pub fn new(name: impl Into<String>, deviation: T, lambda: Complex<T>, tol: T) -> Self {
        Self {
            name: name.into(),
            deviation,
            lambda,
            tol,
            passed: deviation <= tol,
            context: BTreeMap::new(),
        }
    }

    pub fn residual(name: impl Into<String>, deviation: T, tol: T) -> Self {
        Self::new(name, deviation, czero(), tol)
    }

    pub fn with_context(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.context.insert(key.into(), value.to_string());
        self
    }

    /// One-line summary used by the CLI and the acceptance suite. The
    /// scalar is omitted for plain residual checks.
    pub fn summary(&self) -> String {
        let mut line = format!(
            "{} {}: deviation {:.3e} (tol {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.deviation.as_f64(),
            self.tol.as_f64(),
        );
        if self.lambda != czero() {
            line += &format!(
                ", lambda {:.6}{:+.6}i",
                self.lambda.re.as_f64(),
                self.lambda.im.as_f64()
            );
        }
        line
    }
}

pub(crate) fn fmt_complex<T: Real>(z: Complex<T>) -> String {
    format!("{}{:+}i", z.re, z.im)
}

pub(crate) fn fmt_complex_list<T: Real>(zs: &[Complex<T>]) -> String {
    zs.iter().map(|&z| fmt_complex(z)).collect::<Vec<_>>().join(",")
}
