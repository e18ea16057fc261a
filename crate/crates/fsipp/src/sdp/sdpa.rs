//! SDPA sparse format (".dat-s") serialization.
//!
//! The format models min cᵀx subject to X = Σ_i x_i F_i − F_0 ⪰ 0 with X
//! block-diagonal, so a [`ConicProgram`] maps onto it by negating each
//! block's constant matrix. Scalar rows are carried in one trailing diagonal
//! block (negative size in the block-structure line): every equality becomes
//! a pair of opposing inequality rows, every inequality a single row with
//! slack b − aᵀz on the diagonal. A leading `*scalar_rows eq=E ineq=I`
//! comment records the split so that import can reconstruct equalities
//! instead of leaving them as row pairs; files without the marker are read
//! with all diagonal rows as inequalities. Floats are printed with 17
//! significant digits, which round-trips f64 exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{ConicProgram, PsdBlock, SdpError};

/// Render the program as the text of a ".dat-s" file.
pub fn write_str(prog: &ConicProgram) -> String {
    let ne = prog.eqs().len();
    let ni = prog.ineqs().len();
    let scalar_rows = 2 * ne + ni;
    let mut out = String::new();
    if scalar_rows > 0 {
        writeln!(out, "*scalar_rows eq={ne} ineq={ni}").unwrap();
    }
    writeln!(out, "{}", prog.nvars()).unwrap();
    let nblocks = prog.psd_blocks().len() + usize::from(scalar_rows > 0);
    writeln!(out, "{nblocks}").unwrap();
    let mut sizes: Vec<String> = prog.psd_blocks().iter().map(|b| b.size().to_string()).collect();
    if scalar_rows > 0 {
        sizes.push(format!("-{scalar_rows}"));
    }
    writeln!(out, "{}", sizes.join(" ")).unwrap();
    let obj: Vec<String> = prog.objective().iter().map(|&c| fmt_f64(c)).collect();
    writeln!(out, "{}", obj.join(" ")).unwrap();

    // entries keyed (matno, blkno, i, j), all 1-based, upper triangle
    let mut entries: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
    for (bi, block) in prog.psd_blocks().iter().enumerate() {
        for (i, j, v) in block.const_entries() {
            entries.insert((0, bi + 1, i + 1, j + 1), -v);
        }
        for (k, i, j, v) in block.var_entries() {
            entries.insert((k + 1, bi + 1, i + 1, j + 1), v);
        }
    }
    let scalar_blk = prog.psd_blocks().len() + 1;
    let mut row = 1usize;
    let push_scalar_row = |entries: &mut BTreeMap<_, f64>,
                               row: usize,
                               terms: Vec<(usize, f64)>,
                               rhs: f64| {
        // diagonal slot holds b − aᵀz = Σ z_i(−a_i) − (−b)
        if rhs != 0.0 {
            entries.insert((0, scalar_blk, row, row), -rhs);
        }
        for (k, a) in terms {
            entries.insert((k + 1, scalar_blk, row, row), -a);
        }
    };
    for eq in prog.eqs() {
        push_scalar_row(&mut entries, row, eq.terms().collect(), eq.rhs());
        let negated = eq.terms().map(|(k, v)| (k, -v)).collect();
        push_scalar_row(&mut entries, row + 1, negated, -eq.rhs());
        row += 2;
    }
    for ineq in prog.ineqs() {
        push_scalar_row(&mut entries, row, ineq.terms().collect(), ineq.rhs());
        row += 1;
    }

    for (&(mat, blk, i, j), &v) in &entries {
        writeln!(out, "{mat} {blk} {i} {j} {}", fmt_f64(v)).unwrap();
    }
    out
}

/// Parse the text of a ".dat-s" file.
pub fn parse_str(text: &str) -> Result<ConicProgram, SdpError> {
    let mut eq_count: Option<usize> = None;
    let mut ineq_count: Option<usize> = None;
    let mut structural: Vec<(usize, &str)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("*scalar_rows") {
            for tok in rest.split_whitespace() {
                if let Some(v) = tok.strip_prefix("eq=") {
                    eq_count = Some(parse_usize(v, lineno + 1)?);
                } else if let Some(v) = tok.strip_prefix("ineq=") {
                    ineq_count = Some(parse_usize(v, lineno + 1)?);
                }
            }
            continue;
        }
        if line.starts_with('*') || line.starts_with('"') {
            continue; // comment
        }
        structural.push((lineno + 1, raw));
    }
    // the objective line of a variable-free program is legitimately empty;
    // other blank lines are skipped
    let mut iter = structural.into_iter();
    let mut next_line = |what: &str, allow_empty: bool| -> Result<(usize, String), SdpError> {
        for (no, raw) in iter.by_ref() {
            let cleaned: String = raw
                .chars()
                .map(|c| if matches!(c, '{' | '}' | '(' | ')' | ',') { ' ' } else { c })
                .collect();
            if cleaned.trim().is_empty() && !allow_empty {
                continue;
            }
            return Ok((no, cleaned));
        }
        Err(SdpError::Parse(format!("missing {what} line")))
    };

    let (no, line) = next_line("variable-count", false)?;
    let nvars = parse_usize(line.trim(), no)?;
    let (no, line) = next_line("block-count", false)?;
    let nblocks = parse_usize(line.trim(), no)?;
    let (no, line) = next_line("block-structure", nblocks == 0)?;
    let mut psd_sizes = Vec::new();
    let mut diag_blocks: BTreeMap<usize, usize> = BTreeMap::new(); // blkno → rows
    for tok in line.split_whitespace() {
        let s: i64 = tok
            .parse()
            .map_err(|_| SdpError::Parse(format!("line {no}: bad block size {tok:?}")))?;
        if s > 0 {
            psd_sizes.push(s as usize);
        } else if s < 0 {
            diag_blocks.insert(psd_sizes.len() + diag_blocks.len() + 1, (-s) as usize);
        } else {
            return Err(SdpError::Parse(format!("line {no}: zero block size")));
        }
    }
    if psd_sizes.len() + diag_blocks.len() != nblocks {
        return Err(SdpError::Parse(format!(
            "block-structure lists {} blocks, header says {nblocks}",
            psd_sizes.len() + diag_blocks.len()
        )));
    }
    let (no, line) = next_line("objective", nvars == 0)?;
    let obj: Vec<f64> = line
        .split_whitespace()
        .map(|t| parse_f64(t, no))
        .collect::<Result<_, _>>()?;
    if obj.len() != nvars {
        return Err(SdpError::Parse(format!(
            "objective has {} entries for {nvars} variables",
            obj.len()
        )));
    }

    // blkno → index into blocks, or into the flat diagonal row store
    let mut blocks: Vec<PsdBlock> = Vec::new();
    let mut blk_index: BTreeMap<usize, usize> = BTreeMap::new();
    {
        let mut psd_seen = 0;
        for blkno in 1..=nblocks {
            if !diag_blocks.contains_key(&blkno) {
                blocks.push(PsdBlock::new(psd_sizes[psd_seen]));
                blk_index.insert(blkno, psd_seen);
                psd_seen += 1;
            }
        }
    }
    // (blkno, row) → per-matrix diagonal values
    let mut diag_entries: BTreeMap<(usize, usize), BTreeMap<usize, f64>> = BTreeMap::new();

    for (no, raw) in iter {
        let cleaned: String = raw
            .chars()
            .map(|c| if matches!(c, '{' | '}' | '(' | ')' | ',') { ' ' } else { c })
            .collect();
        let toks: Vec<&str> = cleaned.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(SdpError::Parse(format!(
                "line {no}: expected 'matno blkno i j value'"
            )));
        }
        let mat = parse_usize(toks[0], no)?;
        let blk = parse_usize(toks[1], no)?;
        let i = parse_usize(toks[2], no)?;
        let j = parse_usize(toks[3], no)?;
        let v = parse_f64(toks[4], no)?;
        if mat > nvars || blk == 0 || blk > nblocks || i == 0 || j == 0 {
            return Err(SdpError::Parse(format!("line {no}: index out of range")));
        }
        if let Some(&rows) = diag_blocks.get(&blk) {
            if i != j || i > rows {
                return Err(SdpError::Parse(format!(
                    "line {no}: off-diagonal entry in diagonal block"
                )));
            }
            diag_entries.entry((blk, i)).or_default().insert(mat, v);
        } else {
            let b = &mut blocks[blk_index[&blk]];
            if i > b.size() || j > b.size() {
                return Err(SdpError::Parse(format!("line {no}: index out of range")));
            }
            if mat == 0 {
                b.add_const(i - 1, j - 1, -v);
            } else {
                b.add_var(mat - 1, i - 1, j - 1, v);
            }
        }
    }

    let mut prog = ConicProgram::new(nvars);
    prog.set_objective(obj);
    for b in blocks {
        prog.add_psd_block(b);
    }

    // a diagonal row encodes aᵀz ≤ b as F_i[rr] = −a_i, F_0[rr] = −b
    let row_constraint = |diag_entries: &BTreeMap<(usize, usize), BTreeMap<usize, f64>>,
                          blk: usize,
                          row: usize|
     -> (Vec<(usize, f64)>, f64) {
        let empty = BTreeMap::new();
        let vals = diag_entries.get(&(blk, row)).unwrap_or(&empty);
        let rhs = -vals.get(&0).copied().unwrap_or(0.0);
        let terms = vals
            .iter()
            .filter(|&(&m, _)| m > 0)
            .map(|(&m, &v)| (m - 1, -v))
            .collect();
        (terms, rhs)
    };

    match (eq_count, ineq_count, diag_blocks.len()) {
        (Some(ne), Some(ni), _) => {
            let (&blk, &rows) = diag_blocks
                .iter()
                .next()
                .ok_or_else(|| SdpError::Parse("marker present but no diagonal block".into()))?;
            if diag_blocks.len() != 1 || rows != 2 * ne + ni {
                return Err(SdpError::Parse(
                    "diagonal block does not match *scalar_rows marker".into(),
                ));
            }
            for t in 0..ne {
                // rows 2t+1, 2t+2 are the ≤/≥ pair of one equality
                let (terms, rhs) = row_constraint(&diag_entries, blk, 2 * t + 1);
                prog.add_eq(terms, rhs);
            }
            for u in 0..ni {
                let (terms, rhs) = row_constraint(&diag_entries, blk, 2 * ne + u + 1);
                prog.add_ineq(terms, rhs);
            }
        }
        (None, None, _) => {
            // foreign file: every diagonal row is an inequality
            for (&blk, &rows) in &diag_blocks {
                for r in 1..=rows {
                    let (terms, rhs) = row_constraint(&diag_entries, blk, r);
                    prog.add_ineq(terms, rhs);
                }
            }
        }
        _ => {
            return Err(SdpError::Parse(
                "*scalar_rows marker must carry both eq= and ineq=".into(),
            ))
        }
    }
    Ok(prog)
}

pub fn export(prog: &ConicProgram, path: &Path) -> Result<(), SdpError> {
    std::fs::write(path, write_str(prog))?;
    Ok(())
}

pub fn import(path: &Path) -> Result<ConicProgram, SdpError> {
    parse_str(&std::fs::read_to_string(path)?)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_usize(tok: &str, lineno: usize) -> Result<usize, SdpError> {
    tok.trim()
        .parse()
        .map_err(|_| SdpError::Parse(format!("line {lineno}: expected integer, got {tok:?}")))
}

fn parse_f64(tok: &str, lineno: usize) -> Result<f64, SdpError> {
    tok.trim()
        .parse()
        .map_err(|_| SdpError::Parse(format!("line {lineno}: expected number, got {tok:?}")))
}
