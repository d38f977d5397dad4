//! CSV and JSON emission.

use std::io::Write;

use serde::Serialize;

use crate::dirac::DiracFamily;
use crate::exterior::ScalarForm;
use crate::Result;

/// Eigenvalues in `[-window, window]` at `samples` equally spaced
/// parameters, one row per parameter. Short rows are padded with empty
/// fields so that every row matches the header `s,lambda_1,...`.
pub fn write_spectrum_csv<W: Write>(out: W, fam: &DiracFamily, samples: usize, window: f64) -> Result<()> {
    let (a, b) = fam.interval();
    let slices = (0..samples)
        .map(|i| {
            let s = if samples == 1 { a } else { a + (b - a) * i as f64 / (samples - 1) as f64 };
            fam.spectrum(s, window)
        })
        .collect::<Result<Vec<_>>>()?;
    let width = slices.iter().map(|sl| sl.eigenvalues.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["s".to_string()];
    header.extend((1..=width).map(|k| format!("lambda_{k}")));
    w.write_record(&header)?;
    for sl in &slices {
        let mut row = vec![sl.s.to_string()];
        row.extend(sl.eigenvalues.iter().map(|x| x.to_string()));
        row.resize(width + 1, String::new());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Nodal values of every component of a scalar form: grid coordinates
/// followed by the real and imaginary part of each component.
pub fn write_form_csv<W: Write>(out: W, form: &ScalarForm) -> Result<()> {
    let chart = form.chart();
    let comps: Vec<_> = form.components().collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..chart.dim()).map(|k| format!("x{k}")).collect();
    for (idx, _) in &comps {
        let name = idx.axes().map(|a| a.to_string()).collect::<String>();
        let name = if name.is_empty() { "1".into() } else { format!("dx{name}") };
        header.push(format!("{name}_re"));
        header.push(format!("{name}_im"));
    }
    w.write_record(&header)?;
    for node in 0..chart.nodes() {
        let mut row: Vec<String> = chart.coords(node).iter().map(|x| x.to_string()).collect();
        for (_, data) in &comps {
            row.push(data[node].re.to_string());
            row.push(data[node].im.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
