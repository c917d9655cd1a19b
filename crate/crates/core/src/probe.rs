//! Operand-size instrumentation for the dense kernels.
//!
//! Every kernel in [`crate::linalg`] reports the largest dimension it touches.
//! [`measure`] runs a closure with recording enabled on the current thread and
//! returns the largest dimension seen, which is how the offline/online split of
//! reduced models is checked.

use std::cell::Cell;

thread_local! {
    static ACTIVE: Cell<bool> = const { Cell::new(false) };
    static MAX_DIM: Cell<usize> = const { Cell::new(0) };
}

#[inline]
pub(crate) fn touch(dim: usize) {
    ACTIVE.with(|a| {
        if a.get() {
            MAX_DIM.with(|m| m.set(m.get().max(dim)));
        }
    });
}

/// Runs `f` and returns its result with the largest operand dimension any
/// dense kernel touched while it ran.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, usize) {
    let was_active = ACTIVE.with(|a| a.replace(true));
    let saved = MAX_DIM.with(|m| m.replace(0));
    let out = f();
    let seen = MAX_DIM.with(|m| m.get());
    ACTIVE.with(|a| a.set(was_active));
    MAX_DIM.with(|m| m.set(saved.max(if was_active { seen } else { 0 })));
    (out, seen)
}
