//! A counting global allocator for measuring auxiliary memory.
//!
//! Binaries that want allocation accounting install it themselves:
//!
//! ```ignore
//! #[global_allocator]
//! static ALLOC: cmm_core::alloc::TrackingAllocator = cmm_core::alloc::TrackingAllocator::new();
//! ```
//!
//! Then `ALLOC.reset_peak()` before a region and `ALLOC.peak_above_baseline()`
//! after it give the high-water mark of live heap bytes allocated in between.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};

pub struct TrackingAllocator {
    current: AtomicUsize,
    peak: AtomicUsize,
    baseline: AtomicUsize,
}

impl TrackingAllocator {
    pub const fn new() -> Self {
        TrackingAllocator {
            current: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
            baseline: AtomicUsize::new(0),
        }
    }

    pub fn current(&self) -> usize {
        self.current.load(Ordering::Relaxed)
    }

    /// Starts a new measurement window at the current live size.
    pub fn reset_peak(&self) {
        let now = self.current();
        self.baseline.store(now, Ordering::Relaxed);
        self.peak.store(now, Ordering::Relaxed);
    }

    /// Peak live bytes since the last [`reset_peak`](Self::reset_peak),
    /// minus what was live when the window started.
    pub fn peak_above_baseline(&self) -> usize {
        self.peak
            .load(Ordering::Relaxed)
            .saturating_sub(self.baseline.load(Ordering::Relaxed))
    }

    fn add(&self, size: usize) {
        let now = self.current.fetch_add(size, Ordering::Relaxed) + size;
        self.peak.fetch_max(now, Ordering::Relaxed);
    }

    fn sub(&self, size: usize) {
        self.current.fetch_sub(size, Ordering::Relaxed);
    }
}

impl Default for TrackingAllocator {
    fn default() -> Self {
        Self::new()
    }
}

unsafe impl GlobalAlloc for TrackingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let ptr = System.alloc(layout);
        if !ptr.is_null() {
            self.add(layout.size());
        }
        ptr
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let ptr = System.alloc_zeroed(layout);
        if !ptr.is_null() {
            self.add(layout.size());
        }
        ptr
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        self.sub(layout.size());
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let new = System.realloc(ptr, layout, new_size);
        if !new.is_null() {
            self.sub(layout.size());
            self.add(new_size);
        }
        new
    }
}
