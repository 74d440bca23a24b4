//! Word-backed bit rows used for vertex sets.
//!
//! Adjacency state stores one row per vertex inside a flat word buffer;
//! candidate sets own small boxed rows. All operations work on `u64` slices
//! so both layouts share the same code.

pub const WORD_BITS: u32 = 64;

#[inline]
pub fn words_for(bits: u32) -> usize {
    bits.div_ceil(WORD_BITS) as usize
}

/// Set bit `i`; returns true when the bit actually flipped.
#[inline]
pub fn set_bit(row: &mut [u64], i: u32) -> bool {
    let w = (i / WORD_BITS) as usize;
    let m = 1u64 << (i % WORD_BITS);
    let changed = row[w] & m == 0;
    row[w] |= m;
    changed
}

/// Clear bit `i`; returns true when the bit actually flipped.
#[inline]
pub fn clear_bit(row: &mut [u64], i: u32) -> bool {
    let w = (i / WORD_BITS) as usize;
    let m = 1u64 << (i % WORD_BITS);
    let changed = row[w] & m != 0;
    row[w] &= !m;
    changed
}

#[inline]
pub fn test_bit(row: &[u64], i: u32) -> bool {
    row[(i / WORD_BITS) as usize] & (1u64 << (i % WORD_BITS)) != 0
}

/// Set bits `0..n`.
pub fn fill_upto(row: &mut [u64], n: u32) {
    row.fill(0);
    let full = (n / WORD_BITS) as usize;
    for w in row.iter_mut().take(full) {
        *w = !0;
    }
    let rem = n % WORD_BITS;
    if rem != 0 {
        row[full] = (1u64 << rem) - 1;
    }
}

#[inline]
pub fn count_ones(row: &[u64]) -> u32 {
    row.iter().map(|w| w.count_ones()).sum()
}

/// Number of set bits with index `<= limit`.
#[inline]
pub fn count_ones_upto(row: &[u64], limit: u32) -> u32 {
    let full = (limit / WORD_BITS) as usize;
    let mut n: u32 = row[..full.min(row.len())]
        .iter()
        .map(|w| w.count_ones())
        .sum();
    if full < row.len() {
        let rem = limit % WORD_BITS;
        let mask = if rem == 63 {
            !0
        } else {
            (1u64 << (rem + 1)) - 1
        };
        n += (row[full] & mask).count_ones();
    }
    n
}

#[inline]
pub fn first_one_upto(row: &[u64], limit: u32) -> Option<u32> {
    for (w, &word) in row.iter().enumerate() {
        if word != 0 {
            let i = w as u32 * WORD_BITS + word.trailing_zeros();
            return if i <= limit { Some(i) } else { None };
        }
    }
    None
}

/// Ascending iterator over set bits with index `<= limit`.
pub fn iter_ones_upto(row: &[u64], limit: u32) -> impl Iterator<Item = u32> + '_ {
    row.iter().enumerate().flat_map(move |(wi, &word)| {
        let base = wi as u32 * WORD_BITS;
        std::iter::from_fn({
            let mut w = word;
            move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some(base + b)
            }
        })
        .take_while(move |&i| i <= limit)
    })
}

#[inline]
pub fn and_not_assign(dst: &mut [u64], src: &[u64]) -> bool {
    let mut changed = false;
    for (d, s) in dst.iter_mut().zip(src) {
        let nv = *d & !s;
        changed |= nv != *d;
        *d = nv;
    }
    changed
}

#[inline]
pub fn or_assign(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d |= s;
    }
}

#[inline]
pub fn and_assign(dst: &mut [u64], src: &[u64]) -> bool {
    let mut changed = false;
    for (d, s) in dst.iter_mut().zip(src) {
        let nv = *d & s;
        changed |= nv != *d;
        *d = nv;
    }
    changed
}
