//! Multi-threaded emulation. Chunks run on the rayon pool and are merged in
//! chunk order, so results equal [`cnr_core::emulator::emulate`] exactly.

use cnr_core::emulator::{table_row, TableRow};
use cnr_core::{EmulatorRun, EnergySpectrum, Result, Tally};
use rayon::prelude::*;

pub fn par_emulate(run: &EmulatorRun<'_>) -> Result<Tally> {
    let prepared = run.prepare()?;
    let tallies: Vec<Tally> = (0..prepared.num_chunks()).into_par_iter().map(|c| prepared.run_chunk(c)).collect();
    let mut out = Tally::default();
    for t in &tallies {
        out.merge(t);
    }
    Ok(out)
}

/// Emulated table rows for each `p`, all with the run's seed.
pub fn par_table(run: &EmulatorRun<'_>, spec: &EnergySpectrum, ps: &[u32], beta: usize) -> Result<Vec<TableRow>> {
    ps.iter()
        .map(|&p| {
            let tally = par_emulate(&EmulatorRun { p, ..*run })?;
            table_row(spec, &tally.levels(spec, run.instance)?, p, beta)
        })
        .collect()
}
