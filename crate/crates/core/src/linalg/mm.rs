//! MatrixMarket coordinate import/export for real matrices.
//!
//! Export flattens blocked matrices to scalar coordinates, so files written
//! here are plain `matrix coordinate real general` and readable by any
//! MatrixMarket consumer. Import produces scalar-block matrices (`m = 1`).

use std::io::{self, Write};
use std::sync::Arc;

use super::{BlockMatrix, LinalgError, PatternBuilder};

/// Writes the matrix in MatrixMarket coordinate format (1-based indices,
/// flattened scalar entries, ascending row/column order).
pub fn write_matrix_market<W: Write>(m: &BlockMatrix<f64>, w: &mut W) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    let bs = m.block_size();
    let nnz = m.pattern().nnz() * bs * bs;
    writeln!(w, "{} {} {}", m.flat_rows(), m.flat_cols(), nnz)?;
    for i in 0..m.rows() {
        for r in 0..bs {
            for (j, blk) in m.row_entries(i) {
                for c in 0..bs {
                    writeln!(w, "{} {} {}", i * bs + r + 1, j * bs + c + 1, blk[r * bs + c])?;
                }
            }
        }
    }
    Ok(())
}

/// Reads a `matrix coordinate real general` file into a scalar-block matrix.
/// Duplicate coordinates accumulate. Reports the 1-based line number of the
/// first malformed line.
pub fn read_matrix_market(text: &str) -> Result<BlockMatrix<f64>, LinalgError> {
    let parse_err = |line: usize, msg: &str| LinalgError::Parse { line, msg: msg.to_string() };

    let mut lines = text.lines().enumerate();
    let (first_no, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty input"))?;
    let header = first.trim();
    if !header.starts_with("%%MatrixMarket") {
        return Err(parse_err(first_no + 1, "missing MatrixMarket header"));
    }
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5
        || !fields[1].eq_ignore_ascii_case("matrix")
        || !fields[2].eq_ignore_ascii_case("coordinate")
        || !fields[3].eq_ignore_ascii_case("real")
        || !fields[4].eq_ignore_ascii_case("general")
    {
        return Err(parse_err(first_no + 1, "only 'matrix coordinate real general' is supported"));
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(parse_err(no + 1, "size line must be 'rows cols nnz'"));
                }
                let r = toks[0].parse::<usize>().map_err(|_| parse_err(no + 1, "bad row count"))?;
                let c = toks[1].parse::<usize>().map_err(|_| parse_err(no + 1, "bad column count"))?;
                let n = toks[2].parse::<usize>().map_err(|_| parse_err(no + 1, "bad entry count"))?;
                size = Some((r, c, n));
            }
            Some((rows, cols, _)) => {
                if toks.len() != 3 {
                    return Err(parse_err(no + 1, "entry line must be 'row col value'"));
                }
                let i = toks[0].parse::<usize>().map_err(|_| parse_err(no + 1, "bad row index"))?;
                let j = toks[1].parse::<usize>().map_err(|_| parse_err(no + 1, "bad column index"))?;
                let v = toks[2].parse::<f64>().map_err(|_| parse_err(no + 1, "bad value"))?;
                if i < 1 || i > rows || j < 1 || j > cols {
                    return Err(parse_err(no + 1, "index out of bounds"));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }

    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(text.lines().count(), "missing size line"))?;
    if triplets.len() != nnz {
        return Err(LinalgError::Parse {
            line: text.lines().count(),
            msg: format!("expected {} entries, found {}", nnz, triplets.len()),
        });
    }

    let mut builder = PatternBuilder::new(rows, cols);
    for &(i, j, _) in &triplets {
        builder.insert(i, j);
    }
    let mut mat = BlockMatrix::zeros(Arc::new(builder.lock()), 1);
    for &(i, j, v) in &triplets {
        mat.entry_mut(i, j).expect("pattern was built from these entries")[0] += v;
    }
    Ok(mat)
}
