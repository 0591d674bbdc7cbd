use crate::scalar::{lit, Real};

/// Numerical thresholds used across the pipeline.
///
/// Relative tolerances are documented per field; everything else is absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<S> {
    /// Eigenpair residual bound, relative to `max(1, ‖A‖_F)`.
    pub eig_tol: S,
    /// LDLᴴ pivot threshold, relative to `‖G‖₁`.
    pub pivot_tol: S,
    /// Numerical rank threshold, relative to the largest QR diagonal.
    pub rank_tol: S,
    /// Eigenvalue separation threshold, multiplied by `1 + ‖A‖_F`.
    pub sep_tol: S,
    pub res_tol: S,
    pub time_tol: S,
    /// Control weight threshold, relative to `‖b‖₂`.
    pub beta_tol: S,
    pub zero_tol: S,
    /// Frequency collision threshold, multiplied by `1 + K`.
    pub coll_tol: S,
    pub cond_cap: S,
    pub verify_tol: S,
}

impl<S: Real> Default for Tolerances<S> {
    fn default() -> Self {
        Self {
            eig_tol: lit(1e-10),
            pivot_tol: lit(1e-12),
            rank_tol: lit(1e-9),
            sep_tol: lit(1e-8),
            res_tol: lit(1e-9),
            time_tol: lit(1e-12),
            beta_tol: lit(1e-10),
            zero_tol: lit(1e-10),
            coll_tol: lit(1e-8),
            cond_cap: lit(1e12),
            verify_tol: lit(1e-6),
        }
    }
}

impl<S: Real> Tolerances<S> {
    /// Named profile: `default`, `strict` or `loose`.
    pub fn profile(name: &str) -> Option<Self> {
        let base = Self::default();
        match name {
            "default" => Some(base),
            "strict" => Some(Self {
                pivot_tol: lit(1e-10),
                cond_cap: lit(1e10),
                verify_tol: lit(1e-8),
                ..base
            }),
            "loose" => Some(Self {
                pivot_tol: lit(1e-14),
                cond_cap: lit(1e14),
                verify_tol: lit(1e-4),
                ..base
            }),
            _ => None,
        }
    }

    /// Sets a field by name; returns `false` for unknown names.
    pub fn set(&mut self, name: &str, value: S) -> bool {
        let slot = match name {
            "eig_tol" => &mut self.eig_tol,
            "pivot_tol" => &mut self.pivot_tol,
            "rank_tol" => &mut self.rank_tol,
            "sep_tol" => &mut self.sep_tol,
            "res_tol" => &mut self.res_tol,
            "time_tol" => &mut self.time_tol,
            "beta_tol" => &mut self.beta_tol,
            "zero_tol" => &mut self.zero_tol,
            "coll_tol" => &mut self.coll_tol,
            "cond_cap" => &mut self.cond_cap,
            "verify_tol" => &mut self.verify_tol,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub const NAMES: [&'static str; 11] = [
        "eig_tol", "pivot_tol", "rank_tol", "sep_tol", "res_tol", "time_tol", "beta_tol", "zero_tol",
        "coll_tol", "cond_cap", "verify_tol",
    ];

    /// The same tolerances in another scalar type.
    pub fn cast<T: Real>(&self) -> Tolerances<T> {
        let c = |x: S| lit::<T>(crate::scalar::to_f64(x));
        Tolerances {
            eig_tol: c(self.eig_tol),
            pivot_tol: c(self.pivot_tol),
            rank_tol: c(self.rank_tol),
            sep_tol: c(self.sep_tol),
            res_tol: c(self.res_tol),
            time_tol: c(self.time_tol),
            beta_tol: c(self.beta_tol),
            zero_tol: c(self.zero_tol),
            coll_tol: c(self.coll_tol),
            cond_cap: c(self.cond_cap),
            verify_tol: c(self.verify_tol),
        }
    }

    /// Collision threshold for truncation order `k_max`.
    pub fn collision_threshold(&self, k_max: usize) -> S {
        self.coll_tol * (S::one() + crate::scalar::count::<S>(k_max))
    }
}
