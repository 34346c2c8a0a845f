use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// A command result that can be written as JSON or as rows.
pub trait Render: Serialize {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

/// Writes one document per item: JSON lines, or a single CSV/table with the
/// header of the first item.
pub fn emit<T: Render>(items: &[T], format: Format, out: &mut impl Write) -> io::Result<()> {
    match format {
        Format::Json => {
            for it in items {
                serde_json::to_writer(&mut *out, it)?;
                writeln!(out)?;
            }
        }
        Format::Csv => {
            let Some(first) = items.first() else { return Ok(()) };
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(first.header())?;
            for row in items.iter().flat_map(Render::rows) {
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        Format::Table => {
            let Some(first) = items.first() else { return Ok(()) };
            let header: Vec<String> = first.header().into_iter().map(String::from).collect();
            let rows: Vec<Vec<String>> = items.iter().flat_map(Render::rows).collect();
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for r in &rows {
                for (w, cell) in widths.iter_mut().zip(r) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let line = |cells: &[String]| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, &w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            writeln!(out, "{}", line(&header))?;
            writeln!(out, "{}", widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "))?;
            for r in &rows {
                writeln!(out, "{}", line(r))?;
            }
        }
    }
    Ok(())
}

pub fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}
