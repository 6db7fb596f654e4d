//! Integer-order Bessel functions of the first kind.

/// Rescaling threshold for the backward recurrence.
const BIG: f64 = 1e250;

/// `J_n(x)` for integer `n` and real `x`, by Miller's backward recurrence
/// normalized with `J₀ + 2ΣJ_{2k} = 1`.
pub fn bessel_j(order: i64, x: f64) -> f64 {
    let n = order.unsigned_abs();
    // J_{-n} = (-1)^n J_n and J_n(-x) = (-1)^n J_n(x).
    let mut sign = 1.0;
    if order < 0 && n % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && n % 2 == 1 {
        sign = -sign;
    }
    let ax = x.abs();
    if ax == 0.0 {
        return if n == 0 { sign } else { 0.0 };
    }

    let scale = (n as f64).max(ax);
    let mut start = (scale + 20.0 + (40.0 * scale).sqrt()).ceil() as u64;
    start += start % 2;

    let two_over_x = 2.0 / ax;
    let mut j_next = 0.0; // J_{k+1}
    let mut j_curr = 1e-300; // J_k
    let mut result = 0.0;
    let mut norm = 0.0;
    let mut k = start;
    while k > 0 {
        let j_prev = k as f64 * two_over_x * j_curr - j_next;
        j_next = j_curr;
        j_curr = j_prev;
        k -= 1;
        if j_curr.abs() > BIG {
            j_curr /= BIG;
            j_next /= BIG;
            result /= BIG;
            norm /= BIG;
        }
        if k.is_multiple_of(2) && k > 0 {
            norm += j_curr;
        }
        if k == n {
            result = j_curr;
        }
    }
    // j_curr now holds the unnormalized J_0.
    let total = 2.0 * norm + j_curr;
    sign * result / total
}
