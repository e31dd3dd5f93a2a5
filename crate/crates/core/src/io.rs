//! Artifact formatting: 17-significant-digit decimal reals and the BTSEQ
//! saved-sequence format.
//!
//! All emitted reals use [`fmt17`], which round-trips every finite f64
//! bit-exactly, so identical runs produce byte-identical files.

use crate::chart::{ChartKind, DomainChart};
use crate::error::{Error, Result};
use crate::field::{MetricGrid, MetricSequence};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

/// Fixed 17-significant-digit scientific form, e.g. `3.1415926535897931e0`.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// serde_json formatter that prints every f64 via [`fmt17`].
#[derive(Default)]
pub struct Fmt17Formatter;

impl serde_json::ser::Formatter for Fmt17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(fmt17(value).as_bytes())
    }
}

/// Serialize any value to JSON with 17-digit reals.
pub fn to_json_string<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fmt17Formatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::Config(format!("non-utf8 json: {e}")))
}

const BTSEQ_HEADER: &str = "BTSEQ 1";

/// Write a sequence in the BTSEQ text format (bit-exact round-trip).
pub fn save_btseq(seq: &MetricSequence, w: &mut impl Write) -> Result<()> {
    let chart = seq.chart();
    let mut head = String::new();
    writeln!(head, "{BTSEQ_HEADER}").unwrap();
    writeln!(head, "kind {}", chart.kind.as_str()).unwrap();
    writeln!(head, "center {} {}", fmt17(chart.center[0]), fmt17(chart.center[1])).unwrap();
    writeln!(head, "outer_radius {}", fmt17(chart.outer_radius)).unwrap();
    writeln!(head, "inner_radius {}", fmt17(chart.inner_radius)).unwrap();
    writeln!(head, "grid_n {}", chart.grid_n).unwrap();
    writeln!(head, "frames {}", seq.frames.len()).unwrap();
    w.write_all(head.as_bytes())?;
    for (frame, label) in seq.frames.iter().zip(&seq.labels) {
        if frame.vanished {
            writeln!(w, "frame {label} VANISHED")?;
            continue;
        }
        writeln!(w, "frame {label}")?;
        let n = chart.grid_n;
        let mut line = String::with_capacity(n * 24);
        for iy in 0..n {
            line.clear();
            for ix in 0..n {
                if ix > 0 {
                    line.push(' ');
                }
                line.push_str(&fmt17(frame.phi[chart.node_index(ix, iy)]));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
    }
    Ok(())
}

pub fn save_btseq_file(seq: &MetricSequence, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    save_btseq(seq, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn load_btseq(r: impl Read) -> Result<MetricSequence> {
    let reader = BufReader::new(r);
    let mut lines = reader.lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::BadSequenceFile("unexpected end of file".into()))?
            .map_err(Error::Io)
    };
    let header = next()?;
    if header.trim() != BTSEQ_HEADER {
        return Err(Error::BadSequenceFile(format!(
            "bad header `{header}`, expected `{BTSEQ_HEADER}`"
        )));
    }
    let mut kind = None;
    let mut center = None;
    let mut outer = None;
    let mut inner = None;
    let mut grid_n = None;
    let mut frames_n = None;
    for _ in 0..6 {
        let line = next()?;
        let mut it = line.split_whitespace();
        let key = it.next().unwrap_or("");
        let rest: Vec<&str> = it.collect();
        let one = || -> Result<f64> {
            rest.first()
                .ok_or_else(|| Error::BadSequenceFile(format!("missing value for {key}")))?
                .parse()
                .map_err(|e| Error::BadSequenceFile(format!("bad value for {key}: {e}")))
        };
        match key {
            "kind" => kind = Some(ChartKind::parse(rest.first().copied().unwrap_or(""))?),
            "center" => {
                if rest.len() != 2 {
                    return Err(Error::BadSequenceFile("center needs two values".into()));
                }
                let cx: f64 = rest[0]
                    .parse()
                    .map_err(|e| Error::BadSequenceFile(format!("bad center: {e}")))?;
                let cy: f64 = rest[1]
                    .parse()
                    .map_err(|e| Error::BadSequenceFile(format!("bad center: {e}")))?;
                center = Some([cx, cy]);
            }
            "outer_radius" => outer = Some(one()?),
            "inner_radius" => inner = Some(one()?),
            "grid_n" => {
                grid_n = Some(rest.first().copied().unwrap_or("").parse::<usize>().map_err(
                    |e| Error::BadSequenceFile(format!("bad grid_n: {e}")),
                )?)
            }
            "frames" => {
                frames_n = Some(rest.first().copied().unwrap_or("").parse::<usize>().map_err(
                    |e| Error::BadSequenceFile(format!("bad frame count: {e}")),
                )?)
            }
            other => return Err(Error::BadSequenceFile(format!("unexpected key `{other}`"))),
        }
    }
    let chart = DomainChart::new(
        kind.ok_or_else(|| Error::BadSequenceFile("missing kind".into()))?,
        center.ok_or_else(|| Error::BadSequenceFile("missing center".into()))?,
        outer.ok_or_else(|| Error::BadSequenceFile("missing outer_radius".into()))?,
        inner.ok_or_else(|| Error::BadSequenceFile("missing inner_radius".into()))?,
        grid_n.ok_or_else(|| Error::BadSequenceFile("missing grid_n".into()))?,
    )?;
    let frames_n = frames_n.ok_or_else(|| Error::BadSequenceFile("missing frames".into()))?;
    let n = chart.grid_n;
    let mut frames = Vec::with_capacity(frames_n);
    let mut labels = Vec::with_capacity(frames_n);
    for _ in 0..frames_n {
        let line = next()?;
        let mut it = line.split_whitespace();
        if it.next() != Some("frame") {
            return Err(Error::BadSequenceFile(format!("expected `frame ...`, got `{line}`")));
        }
        let label: u64 = it
            .next()
            .ok_or_else(|| Error::BadSequenceFile("missing frame label".into()))?
            .parse()
            .map_err(|e| Error::BadSequenceFile(format!("bad frame label: {e}")))?;
        labels.push(label);
        if it.next() == Some("VANISHED") {
            frames.push(MetricGrid::vanished(&chart));
            continue;
        }
        let mut phi = vec![0.0f64; chart.node_count()];
        for iy in 0..n {
            let row = next()?;
            let mut count = 0;
            for (ix, tok) in row.split_whitespace().enumerate() {
                if ix >= n {
                    return Err(Error::BadSequenceFile("row too long".into()));
                }
                phi[chart.node_index(ix, iy)] = tok
                    .parse()
                    .map_err(|e| Error::BadSequenceFile(format!("bad sample: {e}")))?;
                count += 1;
            }
            if count != n {
                return Err(Error::BadSequenceFile(format!(
                    "row has {count} samples, expected {n}"
                )));
            }
        }
        frames.push(MetricGrid {
            chart: chart.clone(),
            phi,
            vanished: false,
        });
    }
    MetricSequence::new(frames, labels)
}

pub fn load_btseq_file(path: &Path) -> Result<MetricSequence> {
    load_btseq(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::DomainChart;

    #[test]
    fn fmt17_round_trips() {
        for x in [
            0.0,
            1.0,
            -1.0,
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            -2.2250738585072014e-308,
            f64::MAX,
        ] {
            let parsed: f64 = fmt17(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "{x} -> {}", fmt17(x));
        }
    }

    #[test]
    fn btseq_round_trip_bit_exact() {
        let chart = DomainChart::annulus([0.25, -0.5], 0.125, 2.0, 17).unwrap();
        let g1 = MetricGrid::from_fn(&chart, |x, y| (x * 12.34).sin() + y / 3.0).unwrap();
        let g2 = MetricGrid::vanished(&chart);
        let g3 = MetricGrid::from_fn(&chart, |x, y| x * y).unwrap();
        let seq = MetricSequence::new(vec![g1, g2, g3], vec![1, 10, 100]).unwrap();
        let mut buf = Vec::new();
        save_btseq(&seq, &mut buf).unwrap();
        let back = load_btseq(buf.as_slice()).unwrap();
        assert_eq!(back.labels, seq.labels);
        assert_eq!(back.chart(), seq.chart());
        for (a, b) in seq.frames.iter().zip(&back.frames) {
            assert_eq!(a.vanished, b.vanished);
            if !a.vanished {
                assert!(a.phi.iter().zip(&b.phi).all(|(x, y)| x.to_bits() == y.to_bits()));
            }
        }
    }
}
