//! Exhaustive enumeration helpers backing the validation harness.
//!
//! These are intentionally brute force: normalization checks sum a density
//! over every set partition or binary matrix, so the enumeration must not
//! share any code with the densities it certifies.

/// All set partitions of `n` items as restricted growth strings: item 0 is
/// labeled 0 and each later item's label is at most one more than the
/// maximum label before it. Labels are order-of-appearance canonical.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut current = vec![0usize; n];
    grow(&mut current, 1, 0, &mut out);
    out
}

fn grow(current: &mut Vec<usize>, pos: usize, max_label: usize, out: &mut Vec<Vec<usize>>) {
    if pos == current.len() {
        out.push(current.clone());
        return;
    }
    for label in 0..=max_label + 1 {
        current[pos] = label;
        grow(current, pos + 1, max_label.max(label), out);
    }
}

/// The Bell number B(n) via the triangle recurrence.
pub fn bell_number(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 1..=n {
        let mut next = vec![*row.last().unwrap()];
        for &v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

/// All `n_rows x n_cols` binary matrices, encoded as column bit-vectors.
/// There are `2^(n_rows * n_cols)` of them; keep the dimensions tiny.
pub fn binary_matrices(n_rows: usize, n_cols: usize) -> Vec<Vec<Vec<bool>>> {
    let bits = n_rows * n_cols;
    assert!(bits <= 20, "enumeration grows as 2^(rows*cols)");
    let mut out = Vec::with_capacity(1usize << bits);
    for code in 0u32..(1u32 << bits) {
        let mut cols = Vec::with_capacity(n_cols);
        for c in 0..n_cols {
            let mut col = Vec::with_capacity(n_rows);
            for r in 0..n_rows {
                col.push(code >> (c * n_rows + r) & 1 == 1);
            }
            cols.push(col);
        }
        out.push(cols);
    }
    out
}
