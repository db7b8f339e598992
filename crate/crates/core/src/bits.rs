//! Bit-string conventions shared by every module.
//!
//! An `n`-bit string is stored in a `u64` with its first character in the
//! most significant of the `n` low bits, so string position `i` (0-based) is
//! integer bit `n - 1 - i`. Block tuples are packed the same way: block 0
//! occupies the highest `n` bits.

/// Mask with the low `bits` bits set.
#[inline]
pub fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// First `len` characters of an `n`-bit string.
#[inline]
pub fn prefix(value: u64, n: u32, len: u32) -> u64 {
    debug_assert!(len <= n);
    if len == 0 {
        0
    } else {
        value >> (n - len)
    }
}

/// Characters `start..start + len` of an `n`-bit string.
#[inline]
pub fn slice(value: u64, n: u32, start: u32, len: u32) -> u64 {
    debug_assert!(start + len <= n);
    (value >> (n - start - len)) & mask(len)
}

/// Pack `blocks` of `n` bits each, block 0 first.
pub fn pack(blocks: &[u64], n: u32) -> u64 {
    blocks.iter().fold(0u64, |acc, &b| {
        debug_assert!(b <= mask(n));
        if n >= 64 {
            b
        } else {
            (acc << n) | b
        }
    })
}

/// Inverse of [`pack`].
pub fn unpack(packed: u64, n: u32, ell: usize) -> Vec<u64> {
    let mut out = vec![0u64; ell];
    unpack_into(packed, n, &mut out);
    out
}

pub fn unpack_into(packed: u64, n: u32, out: &mut [u64]) {
    let ell = out.len() as u32;
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = slice(packed, n * ell, n * i as u32, n);
    }
}

/// Parse a string of '0'/'1' characters.
pub fn from_bitstr(s: &str) -> Option<u64> {
    if s.len() > 64 {
        return None;
    }
    s.chars().try_fold(0u64, |acc, c| match c {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}

pub fn to_bitstr(value: u64, n: u32) -> String {
    (0..n)
        .map(|i| {
            if (value >> (n - 1 - i)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// `ceil(log2(x))` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}
