//! CSV writers. UTF-8, header row, `\n` line endings.

use std::io::Write;

use ini_sim_core::{LeakageMatrix, MetricsReport};
use serde::Serialize;

#[derive(Serialize)]
struct PerBinRow {
    numerology: u8,
    user: usize,
    abs_bin: usize,
    freq_hz: f64,
    evm: f64,
    sir_db: f64,
    sir_is_infinite: bool,
}

#[derive(Serialize)]
struct PerUserRow {
    numerology: u8,
    user: usize,
    sir_db: f64,
}

#[derive(Serialize)]
struct LeakageRow {
    victim_bin: usize,
    interferer_bin: usize,
    re: f64,
    im: f64,
    mag2: f64,
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn write_per_bin<W: Write>(out: W, report: &MetricsReport) -> csv::Result<()> {
    let mut w = writer(out);
    for b in &report.bins {
        w.serialize(PerBinRow {
            numerology: b.numerology.number(),
            user: b.user_index,
            abs_bin: b.abs_bin,
            freq_hz: b.freq_hz,
            evm: b.evm,
            sir_db: b.sir.db,
            sir_is_infinite: b.sir.infinite,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_per_user<W: Write>(out: W, report: &MetricsReport) -> csv::Result<()> {
    let mut w = writer(out);
    for u in &report.users {
        w.serialize(PerUserRow { numerology: u.numerology.number(), user: u.user_index, sir_db: u.sir.db })?;
    }
    w.flush()?;
    Ok(())
}

/// Rows in victim-major order; bins are flattened as `symbol·fft + bin`.
pub fn write_leakage<W: Write>(out: W, m: &LeakageMatrix) -> csv::Result<()> {
    let mut w = writer(out);
    for row in 0..m.rows.len() {
        for col in 0..m.cols.len() {
            let c = m.get(row, col);
            w.serialize(LeakageRow {
                victim_bin: m.victim_index(row),
                interferer_bin: m.interferer_index(col),
                re: c.re,
                im: c.im,
                mag2: c.norm_sqr(),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
