//! Lehmer generator with Schrage's decomposition, as used for the Taillard
//! benchmark family.

use super::InstanceError;

pub const MULTIPLIER: i64 = 16_807;
pub const QUOTIENT: i64 = 127_773;
pub const REMAINDER: i64 = 2_836;
pub const MODULUS: i64 = 2_147_483_647;

fn check_state(state: u32) -> Result<(), InstanceError> {
    if state == 0 || i64::from(state) >= MODULUS {
        return Err(InstanceError::Argument(format!(
            "LCG state must lie in (0, 2^31 - 1), got {state}"
        )));
    }
    Ok(())
}

/// Next state of the generator.
pub fn lcg_next(state: u32) -> Result<u32, InstanceError> {
    check_state(state)?;
    Ok(step(state))
}

#[inline]
fn step(state: u32) -> u32 {
    let x = i64::from(state);
    let k = x / QUOTIENT;
    let mut next = MULTIPLIER * (x % QUOTIENT) - k * REMAINDER;
    if next < 0 {
        next += MODULUS;
    }
    next as u32
}

/// Draw an integer uniformly from `[lo, hi]`, returning it with the new state.
pub fn lcg_uniform_int(state: u32, lo: i64, hi: i64) -> Result<(i64, u32), InstanceError> {
    check_state(state)?;
    if lo > hi {
        return Err(InstanceError::Argument(format!("empty range [{lo}, {hi}]")));
    }
    let next = step(state);
    Ok((scale(next, lo, hi), next))
}

#[inline]
fn scale(state: u32, lo: i64, hi: i64) -> i64 {
    let u = f64::from(state) / MODULUS as f64;
    let v = (lo as f64 + u * (hi - lo + 1) as f64).floor() as i64;
    v.min(hi)
}

/// Stateful wrapper used by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lcg {
    state: u32,
}

impl Lcg {
    pub fn new(seed: u32) -> Result<Self, InstanceError> {
        check_state(seed)?;
        Ok(Self { state: seed })
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn next_state(&mut self) -> u32 {
        self.state = step(self.state);
        self.state
    }

    /// # Panics
    /// Panics if `lo > hi`.
    pub fn uniform(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        let s = self.next_state();
        scale(s, lo, hi)
    }
}
