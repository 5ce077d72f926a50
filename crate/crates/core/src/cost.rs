//! Exact cost arithmetic for the DP solvers and oracles.
//!
//! Every solver is generic over [`Cost`]. The caller picks the narrowest
//! machine type that provably holds every intermediate value (see
//! [`dispatch_cost!`]) and falls back to `BigUint` otherwise, so arithmetic
//! stays exact either way.

use std::fmt::Debug;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::graph::Weight;

pub trait Cost: Clone + Ord + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn from_weight(w: &Weight) -> Self;
    fn to_weight(&self) -> Weight;
    /// Panics on overflow; callers choose the type from an upper bound on
    /// every value they will form.
    fn plus(&self, other: &Self) -> Self;
}

macro_rules! machine_cost {
    ($t:ty, $conv:ident) => {
        impl Cost for $t {
            fn zero() -> Self {
                0
            }
            fn from_weight(w: &Weight) -> Self {
                w.$conv().expect("weight exceeds the selected cost type")
            }
            fn to_weight(&self) -> Weight {
                BigUint::from(*self)
            }
            #[inline]
            fn plus(&self, other: &Self) -> Self {
                self.checked_add(*other)
                    .expect("cost bound violated: overflow in exact arithmetic")
            }
        }
    };
}

machine_cost!(u32, to_u32);
machine_cost!(u64, to_u64);

impl Cost for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_weight(w: &Weight) -> Self {
        w.clone()
    }
    fn to_weight(&self) -> Weight {
        self.clone()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
}

/// Runs `$body` with `$C` bound to the narrowest cost type able to hold
/// `$bound` (a `&BigUint` upper bound on every value the body forms).
#[macro_export]
macro_rules! dispatch_cost {
    ($bound:expr, $C:ident => $body:expr) => {{
        let bits = ($bound).bits();
        if bits < 32 {
            #[allow(dead_code)]
            type $C = u32;
            $body
        } else if bits < 64 {
            #[allow(dead_code)]
            type $C = u64;
            $body
        } else {
            #[allow(dead_code)]
            type $C = ::num_bigint::BigUint;
            $body
        }
    }};
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_picks_narrow_types() {
        let small = BigUint::from(1000u32);
        let name = dispatch_cost!(&small, C => std::any::type_name::<C>());
        assert_eq!(name, "u32");
        let mid = BigUint::from(u64::MAX / 4);
        let name = dispatch_cost!(&mid, C => std::any::type_name::<C>());
        assert_eq!(name, "u64");
        let big = BigUint::from(u64::MAX) * 4u32;
        let name = dispatch_cost!(&big, C => std::any::type_name::<C>());
        assert!(name.contains("BigUint"));
    }

    #[test]
    #[should_panic]
    fn machine_overflow_panics() {
        let _ = u32::MAX.plus(&1);
    }
}
