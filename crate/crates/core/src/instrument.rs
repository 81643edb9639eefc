//! Operation counting for the shift-add datapath.
//!
//! The point of the architecture is that butterflies use no multipliers and
//! each twiddle rotation costs exactly three shift-add multiplies. Counters
//! here let tests assert that instead of trusting the code structure.
//!
//! Counts accumulate in a thread-local so the hot paths stay free of
//! plumbing arguments. [`with_counting`] snapshots around a closure and
//! returns the delta, which keeps nested measurements honest.

use std::cell::Cell;

/// Totals of the primitive operations the hardware would spend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    /// Shift-add multiplier invocations.
    pub multiplies: u64,
    /// Conditional adds performed inside those multiplies (one per set bit
    /// of the sliced operand).
    pub slice_adds: u64,
}

impl OpCounts {
    fn diff(self, earlier: OpCounts) -> OpCounts {
        OpCounts {
            multiplies: self.multiplies - earlier.multiplies,
            slice_adds: self.slice_adds - earlier.slice_adds,
        }
    }
}

thread_local! {
    static MULTIPLIES: Cell<u64> = const { Cell::new(0) };
    static SLICE_ADDS: Cell<u64> = const { Cell::new(0) };
}

pub(crate) fn record_multiply() {
    MULTIPLIES.with(|c| c.set(c.get() + 1));
}

pub(crate) fn record_slice_adds(n: u64) {
    SLICE_ADDS.with(|c| c.set(c.get() + n));
}

/// Current running totals for this thread.
pub fn snapshot() -> OpCounts {
    OpCounts {
        multiplies: MULTIPLIES.with(Cell::get),
        slice_adds: SLICE_ADDS.with(Cell::get),
    }
}

/// Run `f` and report the operations it spent alongside its result.
pub fn with_counting<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    let before = snapshot();
    let value = f();
    (value, snapshot().diff(before))
}
