//! Plain-text archive format for ensembles and ground truths.
//!
//! ```text
//! <kind> <n> <nprime> <m> <seed|->
//! <rows of whitespace-separated numbers>
//! ```
//!
//! `kind` is `dense`, `mask` or `ground-truth`. Dense ensembles list each
//! `Aᵢ` as `n` rows of `n'` numbers, one matrix after another. Masks list one
//! `row col` pair per line. Ground truths use `m` for the rank, followed by a
//! `psd` flag line and the `n` rows of the matrix. Numbers use the shortest
//! representation that round-trips exactly.

use std::io::{BufRead, Write};

use super::{GroundTruth, Operator, SensingEnsemble};
use crate::error::{Error, Result};
use crate::spectral::DenseMatrix;

fn seed_field(seed: Option<u64>) -> String {
    seed.map_or_else(|| "-".to_string(), |s| s.to_string())
}

fn write_rows(out: &mut impl Write, m: &DenseMatrix) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn write_ensemble(out: &mut impl Write, ens: &SensingEnsemble) -> Result<()> {
    let (n, np) = ens.shape();
    let seed = seed_field(ens.seed());
    if let Operator::Mask { indices } = &ens.op {
        writeln!(out, "mask {n} {np} {} {seed}", ens.m())?;
        for (a, b) in indices {
            writeln!(out, "{a} {b}")?;
        }
    } else {
        writeln!(out, "dense {n} {np} {} {seed}", ens.m())?;
        for i in 0..ens.m() {
            write_rows(out, &ens.matrix(i))?;
        }
    }
    Ok(())
}

pub fn write_ground_truth(out: &mut impl Write, gt: &GroundTruth, seed: Option<u64>) -> Result<()> {
    let (n, np) = gt.matrix.shape();
    writeln!(out, "ground-truth {n} {np} {} {}", gt.rank, seed_field(seed))?;
    writeln!(out, "{}", if gt.psd { "psd" } else { "general" })?;
    write_rows(out, &gt.matrix)
}

struct Lines<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<Vec<String>> {
        loop {
            self.buf.clear();
            self.line += 1;
            if self.inner.read_line(&mut self.buf)? == 0 {
                return Err(self.err("unexpected end of file"));
            }
            let fields: Vec<String> = self.buf.split_whitespace().map(str::to_string).collect();
            if !fields.is_empty() {
                return Ok(fields);
            }
        }
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.to_string(),
        }
    }

    fn numbers<T: std::str::FromStr>(&mut self, count: usize) -> Result<Vec<T>> {
        let fields = self.next()?;
        if fields.len() != count {
            return Err(self.err(&format!("expected {count} fields, found {}", fields.len())));
        }
        fields
            .iter()
            .map(|f| f.parse().map_err(|_| self.err(&format!("bad number {f:?}"))))
            .collect()
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<DenseMatrix> {
        let mut m = DenseMatrix::zeros(rows, cols);
        for i in 0..rows {
            for (j, v) in self.numbers::<f64>(cols)?.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }
}

struct Header {
    kind: String,
    n: usize,
    nprime: usize,
    m: usize,
    seed: Option<u64>,
}

fn header<R: BufRead>(lines: &mut Lines<R>) -> Result<Header> {
    let f = lines.next()?;
    if f.len() != 5 {
        return Err(lines.err("header must be: kind n nprime m seed"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| lines.err(&format!("bad integer {s:?}")));
    let seed = match f[4].as_str() {
        "-" => None,
        s => Some(s.parse().map_err(|_| lines.err(&format!("bad seed {s:?}")))?),
    };
    Ok(Header {
        kind: f[0].clone(),
        n: num(&f[1])?,
        nprime: num(&f[2])?,
        m: num(&f[3])?,
        seed,
    })
}

pub fn read_ensemble(input: impl BufRead) -> Result<SensingEnsemble> {
    let mut lines = Lines {
        inner: input,
        line: 0,
        buf: String::new(),
    };
    let h = header(&mut lines)?;
    let ens = match h.kind.as_str() {
        "dense" => {
            let mats = (0..h.m)
                .map(|_| lines.matrix(h.n, h.nprime))
                .collect::<Result<Vec<_>>>()?;
            SensingEnsemble::from_matrices(&mats)?
        }
        "mask" => {
            let indices = (0..h.m)
                .map(|_| lines.numbers::<usize>(2).map(|v| (v[0], v[1])))
                .collect::<Result<Vec<_>>>()?;
            SensingEnsemble::from_indices((h.n, h.nprime), indices)?
        }
        other => return Err(lines.err(&format!("unknown ensemble kind {other:?}"))),
    };
    Ok(match h.seed {
        Some(s) => ens.with_seed(s),
        None => ens,
    })
}

pub fn read_ground_truth(input: impl BufRead) -> Result<(GroundTruth, Option<u64>)> {
    let mut lines = Lines {
        inner: input,
        line: 0,
        buf: String::new(),
    };
    let h = header(&mut lines)?;
    if h.kind != "ground-truth" {
        return Err(lines.err(&format!("expected ground-truth, found {:?}", h.kind)));
    }
    let psd = match lines.next()?.first().map(String::as_str) {
        Some("psd") => true,
        Some("general") => false,
        _ => return Err(lines.err("expected psd or general")),
    };
    let matrix = lines.matrix(h.n, h.nprime)?;
    Ok((
        GroundTruth {
            matrix,
            rank: h.m,
            psd,
        },
        h.seed,
    ))
}
