//! Best rational approximation by continued fractions.

/// A rational approximation p/q of a real number.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RationalApprox {
    pub p: i64,
    pub q: u64,
    /// |beta - p/q|
    pub error: f64,
}

/// Best rational approximation of `beta` with denominator at most `q_max`,
/// found by walking the continued-fraction convergents (plus the final
/// semiconvergent that still fits under the bound).
///
/// Returns `None` only for non-finite input or `q_max == 0`.
pub fn best_rational(beta: f64, q_max: u64) -> Option<RationalApprox> {
    if !beta.is_finite() || q_max == 0 {
        return None;
    }
    // convergents h_k / k_k built from the continued-fraction expansion
    let mut x = beta;
    let (mut h_prev, mut k_prev): (i64, i64) = (1, 0);
    let (mut h, mut k): (i64, i64) = (beta.floor() as i64, 1);
    let mut best = candidate(beta, h, k as u64);
    x -= x.floor();
    for _ in 0..64 {
        if x.abs() < 1e-18 {
            break;
        }
        x = 1.0 / x;
        let a = x.floor();
        if !a.is_finite() || a >= 9.0e15 {
            break;
        }
        let ai = a as i64;
        let h_next = match ai.checked_mul(h).and_then(|v| v.checked_add(h_prev)) {
            Some(v) => v,
            None => break,
        };
        let k_next = match ai.checked_mul(k).and_then(|v| v.checked_add(k_prev)) {
            Some(v) => v,
            None => break,
        };
        if k_next as u64 > q_max {
            // best semiconvergent (h_prev + j h) / (k_prev + j k) under the bound
            let j = ((q_max as i64).saturating_sub(k_prev)) / k.max(1);
            let j = j.min(ai).max(0);
            if j > 0 {
                let hq = h_prev + j * h;
                let kq = k_prev + j * k;
                if kq > 0 && kq as u64 <= q_max {
                    let c = candidate(beta, hq, kq as u64);
                    if c.error < best.error {
                        best = c;
                    }
                }
            }
            break;
        }
        h_prev = h;
        k_prev = k;
        h = h_next;
        k = k_next;
        let c = candidate(beta, h, k as u64);
        if c.error < best.error {
            best = c;
        }
        x -= a;
    }
    Some(best)
}

fn candidate(beta: f64, p: i64, q: u64) -> RationalApprox {
    let err = (beta - p as f64 / q as f64).abs();
    let g = gcd(p.unsigned_abs(), q);
    RationalApprox {
        p: p / g as i64,
        q: q / g,
        error: err,
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a.max(1), b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
