//! Cooperative execution limits.
//!
//! The core crate has no clock, so time limits are expressed through the
//! [`Deadline`] trait; the std companion crate backs it with `Instant` and a
//! cancellation flag.

/// Polled periodically from inside pattern enumeration.
pub trait Deadline: Sync {
    fn expired(&self) -> bool;
}

/// Never expires.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoDeadline;

impl Deadline for NoDeadline {
    fn expired(&self) -> bool {
        false
    }
}

impl<F: Fn() -> bool + Sync> Deadline for F {
    fn expired(&self) -> bool {
        self()
    }
}

#[derive(Clone, Copy)]
pub struct Budget<'a> {
    pub deadline: &'a dyn Deadline,
    /// Maximum rows in the final result table.
    pub max_rows: Option<usize>,
    /// Maximum rows held by any intermediate clause.
    pub max_intermediate_rows: Option<usize>,
}

pub const DEFAULT_INTERMEDIATE_ROWS: usize = 5_000_000;

impl<'a> Budget<'a> {
    pub fn new(deadline: &'a dyn Deadline) -> Self {
        Budget {
            deadline,
            max_rows: None,
            max_intermediate_rows: Some(DEFAULT_INTERMEDIATE_ROWS),
        }
    }

    pub fn with_max_rows(mut self, max_rows: usize) -> Self {
        self.max_rows = Some(max_rows);
        self
    }

    pub fn with_max_intermediate_rows(mut self, max: Option<usize>) -> Self {
        self.max_intermediate_rows = max;
        self
    }
}

impl Budget<'static> {
    pub fn unlimited() -> Self {
        Budget::new(&NoDeadline)
    }
}

impl core::fmt::Debug for Budget<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Budget")
            .field("max_rows", &self.max_rows)
            .field("max_intermediate_rows", &self.max_intermediate_rows)
            .finish_non_exhaustive()
    }
}
