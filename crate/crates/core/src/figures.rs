//! Tabulated curves for each figure, as named columns of numbers.

use rayon::prelude::*;

use crate::chsh::{
    linspace, s_gg_scatter, s_max, sweep_s, AnglePattern, Decoherence, PatternKind, ScatterForm,
    ScatterRatio,
};
use crate::error::Result;
use crate::motion::{aperture_coefficients, nu_eff, t_crit, OpticsParams, TrapParams, THETA0_MAX, THETA0_MIN};
use crate::protocol::{bell_meas_fidelity, cnot_fidelity};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Short decimal label for a parameter value inside a column name.
pub fn label(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('e') { format!("{v:e}") } else { s }
}

/// Aperture dependence of the critical temperature on `n` grid points over
/// `[0.05, π/2]`, with the configured aperture inserted if it is off-grid.
pub fn tcrit_table(trap: &TrapParams, optics: &OpticsParams, n: usize) -> Result<Table> {
    let mut grid = linspace(THETA0_MIN, THETA0_MAX, n.max(2));
    let t0 = optics.theta0();
    if !grid.iter().any(|g| (g - t0).abs() < 1e-12) {
        grid.push(t0);
        grid.sort_by(f64::total_cmp);
    }
    let mut t = Table::new(names(&["theta0_rad", "A_perp", "A_par", "nu_eff_Hz", "T_cr_K"]));
    for theta0 in grid {
        let o = OpticsParams::new(theta0)?;
        let a = aperture_coefficients(&o);
        t.rows.push(vec![theta0, a.a_perp, a.a_par, nu_eff(trap, &o), t_crit(trap, &o)]);
    }
    Ok(t)
}

pub fn bell_sweep_table(d: Decoherence, kind: PatternKind, xs: &[f64]) -> Table {
    let mut t = Table::new(names(&["x_rad", "S_gg", "S_ge", "S_eg", "S_ee"]));
    t.rows = sweep_s(kind, xs, d)
        .into_iter()
        .map(|r| vec![r.x, r.s[0], r.s[1], r.s[2], r.s[3]])
        .collect();
    t
}

pub fn bell_max_table(kind: PatternKind, ratios: &[f64]) -> Result<Table> {
    let mut t = Table::new(names(&[
        "T_over_Tcr",
        "max_abs_S_violating_family",
        "max_abs_S_other_family",
    ]));
    let ds = ratios
        .iter()
        .map(|&r| Decoherence::from_temperature_ratio(r))
        .collect::<Result<Vec<_>>>()?;
    t.rows = ratios
        .par_iter()
        .zip(ds.par_iter())
        .map(|(&r, &d)| {
            let m = s_max(d, kind);
            vec![r, m.violating.value, m.other.value]
        })
        .collect();
    Ok(t)
}

/// `S_gg(x)` for each scatter ratio in both the printed and first-principles forms.
pub fn scatter_table(d: Decoherence, xis: &[f64], kind: PatternKind, xs: &[f64]) -> Result<Table> {
    let ratios = xis.iter().map(|&x| ScatterRatio::new(x)).collect::<Result<Vec<_>>>()?;
    let mut cols = vec!["x_rad".to_string()];
    for &xi in xis {
        cols.push(format!("S_gg_printed_xi{}", label(xi)));
        cols.push(format!("S_gg_first_principles_xi{}", label(xi)));
    }
    let mut t = Table::new(cols);
    t.rows = xs
        .par_iter()
        .map(|&x| {
            let p = AnglePattern::new(x, kind);
            let mut row = vec![x];
            for &r in &ratios {
                row.push(s_gg_scatter(d, r, p, ScatterForm::Printed));
                row.push(s_gg_scatter(d, r, p, ScatterForm::FirstPrinciples));
            }
            row
        })
        .collect();
    Ok(t)
}

/// Bell-measurement and CNOT fidelities against temperature, one column pair per `ξ`.
pub fn fidelity_vs_t_table(ratios: &[f64], xis: &[f64]) -> Result<Table> {
    let xs = xis.iter().map(|&x| ScatterRatio::new(x)).collect::<Result<Vec<_>>>()?;
    let mut cols = vec!["T_over_Tcr".to_string()];
    cols.extend(xis.iter().map(|x| format!("F_B_xi{}", label(*x))));
    cols.extend(xis.iter().map(|x| format!("F_xi{}", label(*x))));
    let mut t = Table::new(cols);
    for &r in ratios {
        let d = Decoherence::from_temperature_ratio(r)?;
        let mut row = vec![r];
        row.extend(xs.iter().map(|&x| bell_meas_fidelity(d, x)));
        row.extend(xs.iter().map(|&x| cnot_fidelity(d, x)));
        t.rows.push(row);
    }
    Ok(t)
}

/// Bell-measurement and CNOT fidelities against `ξ`, one column pair per temperature.
pub fn fidelity_vs_xi_table(xis: &[f64], ratios: &[f64]) -> Result<Table> {
    let ds = ratios
        .iter()
        .map(|&r| Decoherence::from_temperature_ratio(r))
        .collect::<Result<Vec<_>>>()?;
    let mut cols = vec!["xi".to_string()];
    cols.extend(ratios.iter().map(|r| format!("F_B_t{}", label(*r))));
    cols.extend(ratios.iter().map(|r| format!("F_t{}", label(*r))));
    let mut t = Table::new(cols);
    for &x in xis {
        let xi = ScatterRatio::new(x)?;
        let mut row = vec![x];
        row.extend(ds.iter().map(|&d| bell_meas_fidelity(d, xi)));
        row.extend(ds.iter().map(|&d| cnot_fidelity(d, xi)));
        t.rows.push(row);
    }
    Ok(t)
}
