//! The min-flooding state machine and its round budgets.
//!
//! Every process keeps the smallest value it has seen, broadcasts it each
//! round and adopts anything smaller it hears. Two decision rules exist:
//! [`ProtocolVariant::KnownBound`] decides after a fixed number of rounds,
//! [`ProtocolVariant::UnknownSize`] decides after a run of rounds in which
//! nothing was received.

use core::fmt;
use core::str::FromStr;

/// Input and decision values. Ordered; the protocol agrees on minima.
pub type Value = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolVariant {
    /// Decide `current_min` once `gamma` rounds have run. `gamma == 0`
    /// decides the input before any communication.
    KnownBound { gamma: u64 },
    /// Decide `current_min` after `quiet_period` consecutive rounds without
    /// receiving a message.
    UnknownSize { quiet_period: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProcessState {
    pub input: Value,
    pub current_min: Value,
    pub decided: Option<Value>,
    pub quiet_rounds: u64,
}

impl ProcessState {
    /// Initial state, before round 0. Under `KnownBound { gamma: 0 }` the
    /// process has already decided its input.
    pub fn new(input: Value, variant: ProtocolVariant) -> Self {
        let decided = match variant {
            ProtocolVariant::KnownBound { gamma: 0 } => Some(input),
            _ => None,
        };
        ProcessState {
            input,
            current_min: input,
            decided,
            quiet_rounds: 0,
        }
    }

    pub fn is_decided(&self) -> bool {
        self.decided.is_some()
    }
}

/// The value a process broadcasts to all of its neighbors this round.
/// Decided processes keep broadcasting.
pub fn outgoing_message(state: &ProcessState) -> Value {
    state.current_min
}

/// One round's transition for a process that received `received` from its
/// neighbors during round `round` (0-based). Decided states are returned
/// unchanged.
pub fn step(
    state: &ProcessState,
    received: &[Value],
    variant: ProtocolVariant,
    round: u64,
) -> ProcessState {
    if state.is_decided() {
        return *state;
    }
    let mut next = *state;
    match received.iter().min() {
        Some(&m) => {
            next.current_min = next.current_min.min(m);
            next.quiet_rounds = 0;
        }
        None => next.quiet_rounds += 1,
    }
    let decide = match variant {
        ProtocolVariant::KnownBound { gamma } => round + 1 >= gamma,
        ProtocolVariant::UnknownSize { quiet_period } => next.quiet_rounds >= quiet_period,
    };
    if decide {
        next.decided = Some(next.current_min);
    }
    next
}

/// Rounds sufficient for p-agreement with at most `n` processes:
/// `max(0, p(n - p - 1) + 1)`.
pub fn budget_p_agreement(n: u64, p: u64) -> u64 {
    let (n, p) = (n as i128, p as i128);
    (p * (n - p - 1) + 1).max(0) as u64
}

/// A positive rational slack parameter `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Epsilon {
    num: u64,
    den: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EpsilonError {
    #[error("epsilon must be positive")]
    NotPositive,
    #[error("epsilon denominator is zero")]
    ZeroDenominator,
    #[error("cannot parse {0:?} as a rational (expected e.g. `0.5`, `2` or `3/4`)")]
    Syntax(alloc::string::String),
    #[error("epsilon has too many digits")]
    Overflow,
}

const fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Epsilon {
    pub fn new(num: u64, den: u64) -> Result<Self, EpsilonError> {
        if den == 0 {
            return Err(EpsilonError::ZeroDenominator);
        }
        if num == 0 {
            return Err(EpsilonError::NotPositive);
        }
        let g = gcd(num, den);
        Ok(Epsilon {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    /// `ceil((1 + eps) * p)`.
    pub fn agreement_k(&self, p: u64) -> u64 {
        let (num, den, p) = (self.num as u128, self.den as u128, p as u128);
        ((den + num) * p).div_ceil(den) as u64
    }

    /// Whether `rounds <= 1 + (1 + eps) n / eps`, compared exactly.
    pub fn within_linear_bound(&self, rounds: u64, n: u64) -> bool {
        let (num, den) = (self.num as u128, self.den as u128);
        // rounds * num / den <= num / den + (den + num) n / den
        (rounds as u128) * num <= num + (den + num) * n as u128
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Epsilon {
    type Err = EpsilonError;

    /// Accepts integers, finite decimals and `a/b` fractions.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let syntax = || EpsilonError::Syntax(alloc::string::String::from(s));
        let digits = |d: &str| -> Result<u64, EpsilonError> {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(syntax());
            }
            d.parse().map_err(|_| EpsilonError::Overflow)
        };
        if let Some((a, b)) = s.split_once('/') {
            return Epsilon::new(digits(a.trim())?, digits(b.trim())?);
        }
        match s.split_once('.') {
            None => Epsilon::new(digits(s)?, 1),
            Some((whole, frac)) => {
                let whole = if whole.is_empty() { 0 } else { digits(whole)? };
                let frac_len = u32::try_from(frac.len()).map_err(|_| EpsilonError::Overflow)?;
                let den = 10u64.checked_pow(frac_len).ok_or(EpsilonError::Overflow)?;
                let frac = digits(frac)?;
                let num = whole
                    .checked_mul(den)
                    .and_then(|w| w.checked_add(frac))
                    .ok_or(EpsilonError::Overflow)?;
                Epsilon::new(num, den)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KBudget {
    /// `ceil((1 + eps) p)`
    pub k: u64,
    /// Rounds after which min-flooding reaches k-agreement.
    pub gamma: u64,
}

/// Round budget for `ceil((1 + eps) p)`-agreement:
/// `ceil(1 + k(n - k - 1) / (1 + k eps / (1 + eps)))`, clamped at 0.
pub fn budget_k_agreement(n: u64, p: u64, epsilon: Epsilon) -> KBudget {
    let k = epsilon.agreement_k(p);
    let (num, den) = (epsilon.num as i128, epsilon.den as i128);
    let (n_, k_) = (n as i128, k as i128);
    // 1 + k eps/(1+eps) = (den + num + k num) / (den + num)
    let top = k_ * (n_ - k_ - 1) * (den + num);
    let bottom = den + num + k_ * num;
    let ratio_ceil = if top >= 0 {
        (top + bottom - 1) / bottom
    } else {
        -((-top) / bottom)
    };
    KBudget {
        k,
        gamma: (1 + ratio_ceil).max(0) as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(min: Value) -> ProcessState {
        ProcessState {
            input: min,
            current_min: min,
            decided: None,
            quiet_rounds: 0,
        }
    }

    const LONG: ProtocolVariant = ProtocolVariant::KnownBound { gamma: 100 };

    #[test]
    fn p_budget_values() {
        assert_eq!(budget_p_agreement(10, 2), 15);
        assert_eq!(budget_p_agreement(1, 1), 0);
        assert_eq!(budget_p_agreement(6, 3), 7);
        assert_eq!(budget_p_agreement(2, 3), 0);
    }

    #[test]
    fn k_budget_values() {
        let one = Epsilon::new(1, 1).unwrap();
        assert_eq!(budget_k_agreement(20, 2, one), KBudget { k: 4, gamma: 21 });
        assert_eq!(budget_k_agreement(5, 2, one), KBudget { k: 4, gamma: 1 });
        // k = 4 > n - 1: ceil(1 + 4*(-2)/3) = ceil(-1.67) = -1, clamped to 0
        assert_eq!(budget_k_agreement(3, 2, one), KBudget { k: 4, gamma: 0 });
        // eps = 1/2, p = 3: k = ceil(4.5) = 5; 1 + 5*10/(1 + 5/3) = 1 + 18.75
        let half = Epsilon::new(1, 2).unwrap();
        assert_eq!(budget_k_agreement(16, 3, half), KBudget { k: 5, gamma: 20 });
    }

    #[test]
    fn epsilon_parsing() {
        assert_eq!("0.5".parse::<Epsilon>(), Ok(Epsilon::new(1, 2).unwrap()));
        assert_eq!("2".parse::<Epsilon>(), Ok(Epsilon::new(2, 1).unwrap()));
        assert_eq!("6/8".parse::<Epsilon>(), Ok(Epsilon::new(3, 4).unwrap()));
        assert_eq!(".25".parse::<Epsilon>(), Ok(Epsilon::new(1, 4).unwrap()));
        assert_eq!("0".parse::<Epsilon>(), Err(EpsilonError::NotPositive));
        assert_eq!("1/0".parse::<Epsilon>(), Err(EpsilonError::ZeroDenominator));
        assert!(matches!("-1".parse::<Epsilon>(), Err(EpsilonError::Syntax(_))));
        assert_eq!(alloc::format!("{}", Epsilon::new(1, 2).unwrap()), "1/2");
    }

    #[test]
    fn step_takes_smaller_value() {
        let s = step(&state(5), &[3, 7], LONG, 0);
        assert_eq!(s.current_min, 3);
        assert_eq!(s.quiet_rounds, 0);
        assert_eq!(outgoing_message(&s), 3);
    }

    #[test]
    fn step_ignores_equal_values() {
        let mut s = state(4);
        s.quiet_rounds = 2;
        let s = step(&s, &[4, 4], LONG, 0);
        assert_eq!(s.current_min, 4);
        assert_eq!(s.quiet_rounds, 0);
    }

    #[test]
    fn quiet_period_decides() {
        let variant = ProtocolVariant::UnknownSize { quiet_period: 3 };
        let mut s = state(2);
        s.quiet_rounds = 2;
        let s = step(&s, &[], variant, 9);
        assert_eq!(s.quiet_rounds, 3);
        assert_eq!(s.decided, Some(2));
    }

    #[test]
    fn reception_resets_quiet_counter() {
        let variant = ProtocolVariant::UnknownSize { quiet_period: 3 };
        let mut s = state(2);
        s = step(&s, &[], variant, 0);
        s = step(&s, &[], variant, 1);
        s = step(&s, &[1], variant, 2);
        assert_eq!((s.quiet_rounds, s.decided), (0, None));
        assert_eq!(s.current_min, 1);
    }

    #[test]
    fn known_bound_decides_on_last_round() {
        let variant = ProtocolVariant::KnownBound { gamma: 3 };
        let mut s = state(9);
        s = step(&s, &[8], variant, 0);
        s = step(&s, &[], variant, 1);
        assert_eq!(s.decided, None);
        s = step(&s, &[4], variant, 2);
        assert_eq!(s.decided, Some(4));
        assert_eq!(ProcessState::new(6, ProtocolVariant::KnownBound { gamma: 0 }).decided, Some(6));
    }

    #[test]
    fn decided_states_freeze_but_keep_broadcasting() {
        let mut s = state(1);
        s.decided = Some(1);
        assert_eq!(step(&s, &[0], LONG, 0), s);
        assert_eq!(outgoing_message(&s), 1);
    }

    fn arb_epsilon() -> impl Strategy<Value = Epsilon> {
        (1u64..50, 1u64..50).prop_map(|(a, b)| Epsilon::new(a, b).unwrap())
    }

    proptest! {
        #[test]
        fn k_budget_below_linear_bound(n in 1u64..500, p in 1u64..10, eps in arb_epsilon()) {
            let b = budget_k_agreement(n, p, eps);
            prop_assert!(eps.within_linear_bound(b.gamma, n));
        }

        // f64 evaluation of the same closed form, away from integer ties.
        #[test]
        fn k_budget_matches_float_formula(n in 1u64..200, p in 1u64..6, eps in arb_epsilon()) {
            let e = eps.numer() as f64 / eps.denom() as f64;
            let k = ((1.0 + e) * p as f64 - 1e-9).ceil();
            let b = budget_k_agreement(n, p, eps);
            prop_assert_eq!(b.k as f64, k);
            let raw = 1.0 + k * (n as f64 - k - 1.0) / (1.0 + k * e / (1.0 + e));
            if (raw - raw.round()).abs() > 1e-6 {
                prop_assert_eq!(b.gamma as f64, raw.ceil().max(0.0));
            }
        }

        #[test]
        fn min_is_monotone(start in -50i64..50, rounds in prop::collection::vec(prop::collection::vec(-60i64..60, 0..4), 0..20)) {
            let mut s = state(start);
            for (r, received) in rounds.iter().enumerate() {
                let next = step(&s, received, LONG, r as u64);
                prop_assert!(next.current_min <= s.current_min);
                prop_assert!(next.current_min <= next.input);
                s = next;
            }
        }
    }
}
