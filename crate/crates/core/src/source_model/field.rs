//! Arithmetic and Gaussian elimination over a prime field GF(q).

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse of a nonzero element (Fermat).
fn inv_mod(a: u64, q: u64) -> u64 {
    pow_mod(a, q - 2, q)
}

/// Rank of the row set over GF(q). `q` must be prime and every entry `< q`.
pub fn rank<'a>(rows: impl IntoIterator<Item = &'a [u64]>, q: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.into_iter().map(|r| r.to_vec()).collect();
    let Some(cols) = m.first().map(Vec::len) else {
        return 0;
    };
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = inv_mod(m[rank][col], q);
        for v in m[rank].iter_mut() {
            *v = mul_mod(*v, inv, q);
        }
        let (head, tail) = m.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail.iter_mut() {
            let factor = row[col];
            if factor == 0 {
                continue;
            }
            for (v, p) in row.iter_mut().zip(pivot_row) {
                *v = (*v + q - mul_mod(factor, *p, q)) % q;
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank_of(rows: &[Vec<u64>], q: u64) -> usize {
        rank(rows.iter().map(Vec::as_slice), q)
    }

    #[test]
    fn primes() {
        assert!(is_prime(2));
        assert!(is_prime(3));
        assert!(is_prime(257));
        assert!(!is_prime(1));
        assert!(!is_prime(4));
        assert!(!is_prime(256));
    }

    #[test]
    fn binary_rank() {
        // a+b, b+c, a+c are dependent over GF(2) but not over GF(3).
        let rows = vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]];
        assert_eq!(rank_of(&rows, 2), 2);
        assert_eq!(rank_of(&rows, 3), 3);
    }

    #[test]
    fn zero_and_duplicate_rows() {
        let rows = vec![vec![0, 0], vec![2, 1], vec![2, 1], vec![4, 2]];
        assert_eq!(rank_of(&rows, 5), 1);
        assert_eq!(rank_of(&[], 5), 0);
    }

    #[test]
    fn inverse_is_inverse() {
        for q in [2u64, 3, 7, 251] {
            for a in 1..q {
                assert_eq!(mul_mod(a, inv_mod(a, q), q), 1);
            }
        }
    }
}
