//! Row types of the CSV outputs and the code that fills them.

use cnr_core::emulator::TableRow;
use cnr_core::metrics::{
    avg_relative_error_of, cumulative_complement, cumulative_lower_bound, min_p_for, relative_error,
    worst_case_conditional_of, BoundLines,
};
use cnr_core::qpe::{self, CnrConfig, PhaseFraction};
use cnr_core::recursion::distribution_at;
use cnr_core::{EnergySpectrum, ProblemInstance, Result};
use serde::Serialize;

pub const SCATTER_SCHEMA: &str = "cnr.spectrum.scatter/1";
pub const LEVELS_SCHEMA: &str = "cnr.spectrum.levels/1";
pub const RECURSE_SCHEMA: &str = "cnr.recurse/1";
pub const BOUNDS_SCHEMA: &str = "cnr.bounds/1";
pub const BOUNDS_SUMMARY_SCHEMA: &str = "cnr.bounds.summary/1";
pub const SIMULATE_SCHEMA: &str = "cnr.simulate/1";
pub const EMULATE_SCHEMA: &str = "cnr.emulate/1";
pub const HISTOGRAM_SCHEMA: &str = "cnr.emulate.histogram/1";
pub const QPE_SCHEMA: &str = "cnr.qpe_dist/1";
pub const REPORT_SCHEMA: &str = "cnr.report/1";
pub const REPORT_JSON_SCHEMA: &str = "cnr.report.json/1";
pub const INSTANCE_SCHEMA: &str = "cnr.instance/1";

/// One basis string in ascending-energy order; `zeta` is its rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow {
    pub zeta: u64,
    pub energy: f64,
    pub level: usize,
    pub index: u64,
}

pub fn scatter_rows(inst: &ProblemInstance, spec: &EnergySpectrum) -> Result<Vec<ScatterRow>> {
    let energies = inst.energy_table()?;
    let levels = spec.level_table(inst)?;
    let mut order: Vec<u64> = (0..energies.len() as u64).collect();
    order.sort_by(|&a, &b| levels[a as usize].cmp(&levels[b as usize]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(rank, z)| ScatterRow {
            zeta: rank as u64,
            energy: energies[z as usize],
            level: levels[z as usize] as usize + 1,
            index: z,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurseRow {
    pub p: u32,
    pub level: usize,
    pub energy: f64,
    pub degeneracy: u64,
    pub prob: f64,
    pub cumulative: f64,
}

pub fn recurse_rows(spec: &EnergySpectrum, ps: &[u32]) -> Result<Vec<RecurseRow>> {
    let mut rows = Vec::new();
    for &p in ps {
        let dist = distribution_at(spec, p)?;
        let prefix = dist.prefix_sums();
        for (k, level) in spec.levels().iter().enumerate() {
            rows.push(RecurseRow {
                p,
                level: k + 1,
                energy: level.energy,
                degeneracy: level.degeneracy,
                prob: dist.probs()[k],
                cumulative: prefix[k],
            });
        }
    }
    Ok(rows)
}

/// One row of the published table layout. Exact values always; emulated values
/// with standard errors when an emulation was requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub p: u32,
    pub beta_plus_1: usize,
    pub a_beta: u64,
    pub cum_prob: f64,
    pub cum_complement: f64,
    pub lower_bound: Option<f64>,
    pub avg_rel_error: f64,
    pub worst_case_cond: f64,
    pub samples: Option<u64>,
    pub emp_cum_prob: Option<f64>,
    pub emp_cum_prob_se: Option<f64>,
    pub emp_avg_rel_error: Option<f64>,
    pub emp_avg_rel_error_se: Option<f64>,
    pub emp_worst_case_cond: Option<f64>,
    pub emp_worst_case_cond_se: Option<f64>,
}

pub fn report_rows(spec: &EnergySpectrum, ps: &[u32], beta: usize) -> Result<Vec<ReportRow>> {
    if beta >= spec.num_levels() {
        return Err(cnr_core::Error::Argument(format!(
            "beta = {beta} but the spectrum has {} levels",
            spec.num_levels()
        )));
    }
    let a_beta = spec.neighborhood_count(beta);
    ps.iter()
        .map(|&p| {
            let dist = distribution_at(spec, p)?;
            let comp = cumulative_complement(spec, beta, p)?;
            Ok(ReportRow {
                p,
                beta_plus_1: beta + 1,
                a_beta,
                cum_prob: 1.0 - comp,
                cum_complement: comp,
                lower_bound: spec.n_bits().map(|n| cumulative_lower_bound(n as u32, a_beta, p)),
                avg_rel_error: avg_relative_error_of(spec, &dist, beta)?,
                worst_case_cond: worst_case_conditional_of(&dist, beta)?,
                samples: None,
                emp_cum_prob: None,
                emp_cum_prob_se: None,
                emp_avg_rel_error: None,
                emp_avg_rel_error_se: None,
                emp_worst_case_cond: None,
                emp_worst_case_cond_se: None,
            })
        })
        .collect()
}

/// Copies emulated estimates into the rows with matching `p`.
pub fn attach_emulated(rows: &mut [ReportRow], table: &[TableRow]) {
    for row in rows {
        if let Some(t) = table.iter().find(|t| t.p == row.p) {
            row.samples = Some(t.samples);
            row.emp_cum_prob = Some(t.cum.value);
            row.emp_cum_prob_se = Some(t.cum.std_error);
            row.emp_avg_rel_error = Some(t.avg_rel_error.value);
            row.emp_avg_rel_error_se = Some(t.avg_rel_error.std_error);
            row.emp_worst_case_cond = Some(t.worst_case.value);
            row.emp_worst_case_cond_se = Some(t.worst_case.std_error);
        }
    }
}

/// Fixed-width text table at four decimals.
pub fn display_table(rows: &[ReportRow]) -> String {
    let mut out = format!("{:>3} {:>6} {:>6} {:>8} {:>8} {:>10}\n", "p", "beta+1", "A_beta", "P", "avg_aR", "Pr(b+1|U)");
    for r in rows {
        out += &format!(
            "{:>3} {:>6} {:>6} {:>8.4} {:>8.4} {:>10.4}\n",
            r.p, r.beta_plus_1, r.a_beta, r.cum_prob, r.avg_rel_error, r.worst_case_cond
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub level: usize,
    pub energy: f64,
    pub relative_error: f64,
    pub critical: f64,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSummary {
    pub eps_r: f64,
    pub a_tilde: usize,
    pub critical_slope: f64,
    pub e1: f64,
    pub beta_max: usize,
    pub bound_slope: Option<f64>,
    /// Largest beta with `alpha_R <= eps_r` on the true energies.
    pub beta_true: usize,
    pub a_beta_max: u64,
    pub eta: Option<f64>,
    pub min_p: Option<u32>,
}

pub fn bounds_tables(spec: &EnergySpectrum, eps_r: f64, eta: Option<f64>) -> Result<(Vec<BoundsRow>, BoundsSummary)> {
    let lines = BoundLines::build(spec, eps_r)?;
    let rows = (1..=spec.num_levels())
        .map(|a| {
            Ok(BoundsRow {
                level: a,
                energy: spec.energy(a),
                relative_error: relative_error(spec, a)?,
                critical: lines.e_critical.eval(a as f64),
                bound: lines.e_bound.map(|l| l.eval(a as f64)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let a_beta_max = spec.neighborhood_count(lines.beta_max.min(spec.num_levels() - 1));
    let min_p = match (eta, spec.n_bits()) {
        (Some(eta), Some(n)) => Some(min_p_for(eta, n as u32, a_beta_max)?),
        _ => None,
    };
    let summary = BoundsSummary {
        eps_r,
        a_tilde: lines.a_tilde,
        critical_slope: lines.critical_slope,
        e1: lines.e_critical.e1,
        beta_max: lines.beta_max,
        bound_slope: lines.e_bound.map(|l| l.slope),
        beta_true: cnr_core::metrics::beta_from_energies(spec, eps_r)?,
        a_beta_max,
        eta,
        min_p,
    };
    Ok((rows, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub index: u64,
    pub bits: String,
    pub energy: f64,
    pub level: usize,
    pub prob: f64,
}

pub fn sim_rows(inst: &ProblemInstance, spec: &EnergySpectrum, dist: &[f64]) -> Result<Vec<SimRow>> {
    let levels = spec.level_table(inst)?;
    Ok(dist
        .iter()
        .enumerate()
        .map(|(z, &prob)| SimRow {
            index: z as u64,
            bits: format!("{:0width$b}", z, width = inst.n()),
            energy: inst.energy(z as u64),
            level: levels[z] as usize + 1,
            prob,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmulateRow {
    pub p: u32,
    pub beta_plus_1: usize,
    pub a_beta: u64,
    pub samples: u64,
    pub cum_prob: f64,
    pub cum_prob_se: f64,
    pub exact_cum_prob: f64,
    pub avg_rel_error: f64,
    pub avg_rel_error_se: f64,
    pub exact_avg_rel_error: f64,
    pub worst_case_cond: f64,
    pub worst_case_cond_se: f64,
    pub exact_worst_case_cond: f64,
}

impl From<&TableRow> for EmulateRow {
    fn from(t: &TableRow) -> Self {
        EmulateRow {
            p: t.p,
            beta_plus_1: t.beta + 1,
            a_beta: t.a_beta,
            samples: t.samples,
            cum_prob: t.cum.value,
            cum_prob_se: t.cum.std_error,
            exact_cum_prob: t.exact_cum,
            avg_rel_error: t.avg_rel_error.value,
            avg_rel_error_se: t.avg_rel_error.std_error,
            exact_avg_rel_error: t.exact_avg_rel_error,
            worst_case_cond: t.worst_case.value,
            worst_case_cond_se: t.worst_case.std_error,
            exact_worst_case_cond: t.exact_worst_case,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramRow {
    pub p: u32,
    pub energy: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QpeRow {
    pub x: u64,
    pub bits: String,
    pub prob: f64,
    pub reads_negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QpeSummary {
    pub delta: f64,
    pub t: u32,
    pub peak_bin: u64,
    pub peak_prob: f64,
    pub sign_error: f64,
}

pub fn qpe_tables(delta: PhaseFraction, t: u32) -> Result<(Vec<QpeRow>, QpeSummary)> {
    CnrConfig::with_scale(t, 1.0)?;
    let dist = qpe::distribution(delta, t);
    let rows = dist
        .iter()
        .enumerate()
        .map(|(x, &prob)| QpeRow {
            x: x as u64,
            bits: format!("{:0width$b}", x, width = t as usize),
            prob,
            reads_negative: qpe::reads_negative(x as u64, t),
        })
        .collect();
    let peak = qpe::peak_bin(delta, t);
    let summary = QpeSummary {
        delta: delta.value(),
        t,
        peak_bin: peak,
        peak_prob: dist[peak as usize],
        sign_error: qpe::sign_error_prob(delta, t),
    };
    Ok((rows, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cnr_core::cost::DEFAULT_GROUPING_TOL;

    #[test]
    fn scatter_is_sorted_and_complete() {
        let inst = cnr_core::generators::gen_gaussian(5, 1).unwrap();
        let spec = EnergySpectrum::enumerate(&inst, DEFAULT_GROUPING_TOL).unwrap();
        let rows = scatter_rows(&inst, &spec).unwrap();
        assert_eq!(rows.len(), 32);
        assert!(rows.windows(2).all(|w| w[0].energy <= w[1].energy + 1e-12 && w[0].level <= w[1].level));
        let mut idx: Vec<u64> = rows.iter().map(|r| r.index).collect();
        idx.sort();
        assert_eq!(idx, (0..32).collect::<Vec<_>>());
    }

    #[test]
    fn report_rows_reference_column() {
        let spec = EnergySpectrum::from_levels(&[(0.0, 58), (1.0, 966)]).unwrap();
        let rows = report_rows(&spec, &[4, 5, 6, 7, 8, 9], 0).unwrap();
        let want = [0.6066, 0.8452, 0.9760, 0.9994, 1.0000, 1.0000];
        for (r, w) in rows.iter().zip(want) {
            assert!((r.cum_prob - w).abs() <= 5e-5, "p={}: {}", r.p, r.cum_prob);
            assert_eq!(r.worst_case_cond, 1.0);
            assert_eq!(r.avg_rel_error, 0.0);
            assert!(r.lower_bound.unwrap() <= r.cum_prob);
        }
        assert!((rows[3].cum_complement - 5.7e-4).abs() < 5e-6);
        assert!(display_table(&rows).contains("  7      1     58   0.9994"));
        assert!(report_rows(&spec, &[4], 2).is_err());
    }

    #[test]
    fn recurse_rows_sum_to_one() {
        let spec = EnergySpectrum::from_levels(&[(0.0, 1), (1.0, 2), (2.0, 5)]).unwrap();
        let rows = recurse_rows(&spec, &[0, 3]).unwrap();
        assert_eq!(rows.len(), 6);
        assert!((rows[2].cumulative - 1.0).abs() < 1e-15 && (rows[5].cumulative - 1.0).abs() < 1e-15);
        assert_eq!(rows[0].prob, 1.0 / 8.0);
    }

    #[test]
    fn bounds_summary_consistent() {
        // chord slopes 1, 1, 5/6: ties resolve to level 2; beta_max = floor(0.8 * 2.5 / 1)
        let spec = EnergySpectrum::from_levels(&[(0.0, 1), (1.0, 3), (2.0, 6), (2.5, 6)]).unwrap();
        let (rows, summary) = bounds_tables(&spec, 0.8, Some(0.9)).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.critical >= r.energy - 1e-12));
        assert!(rows.iter().all(|r| r.bound.map_or(true, |b| b >= r.critical - 1e-12)));
        assert_eq!(summary.a_tilde, 2);
        assert_eq!(summary.beta_max, 2);
        assert_eq!(summary.bound_slope, Some(1.0));
        assert_eq!(summary.a_beta_max, 10);
        assert!(summary.min_p.is_some());
    }

    #[test]
    fn qpe_tables_normalized() {
        let (rows, s) = qpe_tables(PhaseFraction::new(-0.2).unwrap(), 6).unwrap();
        assert!((rows.iter().map(|r| r.prob).sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(s.peak_bin, 51);
        assert!(rows[51].reads_negative && !rows[0].reads_negative);
        assert!(qpe_tables(PhaseFraction::new(0.1).unwrap(), 40).is_err());
    }
}
