//! Integer pixel geometry shared by the treemap and the grid baseline.

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle in whole pixels. `x`/`y` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    pub const fn right(&self) -> u32 {
        self.x + self.w
    }

    pub const fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub const fn is_empty(&self) -> bool {
        self.w == 0 || self.h == 0
    }

    pub const fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    /// Shrinks every side by `pad`, collapsing to a zero-size rect at the
    /// center when the rect is too small.
    pub fn inset(&self, pad: u32) -> Rect {
        let w = self.w.saturating_sub(2 * pad);
        let h = self.h.saturating_sub(2 * pad);
        let x = if self.w >= 2 * pad { self.x + pad } else { self.x + self.w / 2 };
        let y = if self.h >= 2 * pad { self.y + pad } else { self.y + self.h / 2 };
        Rect { x, y, w, h }
    }

    /// Moves `self` the least distance needed to lie within `frame`,
    /// shrinking it first if it is larger.
    pub fn clamp_into(&self, frame: Rect) -> Rect {
        let w = self.w.min(frame.w);
        let h = self.h.min(frame.h);
        Rect {
            x: self.x.clamp(frame.x, frame.right() - w),
            y: self.y.clamp(frame.y, frame.bottom() - h),
            w,
            h,
        }
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    /// Interiors intersect. Zero-size rects never overlap anything.
    pub fn overlaps(&self, other: &Rect) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Viewport {
    pub width: u32,
    pub height: u32,
}

impl Viewport {
    pub const fn new(width: u32, height: u32) -> Self {
        Viewport { width, height }
    }

    pub const fn rect(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

impl ImageSize {
    pub const fn new(width: u32, height: u32) -> Self {
        ImageSize { width, height }
    }

    pub const fn square(side: u32) -> Self {
        ImageSize { width: side, height: side }
    }
}
