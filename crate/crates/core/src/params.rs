use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Run-wide parameters: residue field size, storage windows for field
/// elements, X-truncation for series results and the coset-enumeration cap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalParams {
    pub q: u32,
    pub t1_window: (i32, i32),
    pub t2_window: (i32, i32),
    pub x_trunc: i64,
    pub coset_budget: u64,
}

impl Default for GlobalParams {
    fn default() -> Self {
        GlobalParams {
            q: 2,
            t1_window: (-16, 16),
            t2_window: (-8, 8),
            x_trunc: 8,
            coset_budget: 100_000,
        }
    }
}

impl GlobalParams {
    pub fn new(q: u32) -> Result<Self> {
        let p = GlobalParams { q, ..Default::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_windows(mut self, t1: (i32, i32), t2: (i32, i32)) -> Result<Self> {
        self.t1_window = t1;
        self.t2_window = t2;
        self.validate()?;
        Ok(self)
    }

    pub fn with_budget(mut self, budget: u64) -> Result<Self> {
        self.coset_budget = budget;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.q) {
            return Err(Error::InvalidParams(format!("q = {} is not prime", self.q)));
        }
        if self.t1_window.0 >= self.t1_window.1 || self.t2_window.0 >= self.t2_window.1 {
            return Err(Error::InvalidParams("window bounds must satisfy lo < hi".into()));
        }
        if self.x_trunc < 0 {
            return Err(Error::InvalidParams("x_trunc must be non-negative".into()));
        }
        if self.coset_budget == 0 {
            return Err(Error::InvalidParams("coset_budget must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composite_q() {
        assert!(GlobalParams::new(4).is_err());
        assert!(GlobalParams::new(1).is_err());
        assert!(GlobalParams::new(7).is_ok());
    }

    #[test]
    fn rejects_degenerate_windows() {
        assert!(GlobalParams::default().with_windows((3, 3), (-1, 1)).is_err());
        assert!(GlobalParams::default().with_budget(0).is_err());
    }
}
