//! Speed-grid sweeps rendered as CSV.

use std::fmt::Write as _;
use std::path::Path;

use relcode_core::infogeo::{fisher_paper, kld_closed_form};
use relcode_core::relativity::lorentz_gamma;
use relcode_core::thermo::{free_energy_point, mode_kld};
use relcode_core::{Error, KldMode, Result, SenderModel};

use crate::{fmt, Quantity};

pub const SWEEP_HEADER: &str = "v,gamma,kld_simplified,kld_closed_form,fisher,f_receiver,regime";

/// Inclusive uniform grid on `[v_min, v_max]` with `0 <= v_min < v_max < c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    v_min: f64,
    v_max: f64,
    steps: usize,
}

impl SweepGrid {
    pub fn new(v_min: f64, v_max: f64, steps: usize, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "light speed {c} must be positive"
            )));
        }
        if !(0.0 <= v_min && v_min < v_max && v_max < c) {
            return Err(Error::InvalidParameter(format!(
                "grid needs 0 <= v_min < v_max < c (got {v_min}, {v_max}, c={c})"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "steps {steps} must be at least 2"
            )));
        }
        Ok(Self {
            v_min,
            v_max,
            steps,
        })
    }

    pub fn len(&self) -> usize {
        self.steps
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.v_max;
        }
        self.v_min + (self.v_max - self.v_min) * i as f64 / (self.steps - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.steps).map(|i| self.point(i))
    }
}

/// Which optional column groups a sweep fills in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepColumns {
    pub kld: bool,
    pub fisher: bool,
    pub free_energy: bool,
}

impl From<Quantity> for SweepColumns {
    fn from(q: Quantity) -> Self {
        let all = q == Quantity::All;
        Self {
            kld: all || q == Quantity::Kld,
            fisher: all || q == Quantity::Fisher,
            free_energy: all || q == Quantity::FreeEnergy,
        }
    }
}

fn cell(value: Result<f64>) -> Result<String> {
    match value {
        Ok(x) if x.is_finite() => Ok(fmt(x)),
        Ok(_) | Err(Error::NumericOverflow(_)) => Ok("overflow".into()),
        Err(e) => Err(e),
    }
}

/// Renders the full CSV document, header included. The receiver assumes `v0 = 0`.
pub fn render<M: SenderModel>(
    model: &M,
    grid: &SweepGrid,
    columns: SweepColumns,
    mode: KldMode,
) -> Result<String> {
    let c = model.light_speed();
    let mut out = String::with_capacity(64 * (grid.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for v in grid.points() {
        let mut row = vec![fmt(v), cell(lorentz_gamma(v, c))?];
        if columns.kld {
            row.push(cell(mode_kld(model, v, 0.0, KldMode::Simplified))?);
            row.push(match model.explicit() {
                Some(m) => cell(kld_closed_form(m, v, 0.0).map(|k| k.value))?,
                None => String::new(),
            });
        } else {
            row.extend([String::new(), String::new()]);
        }
        row.push(if columns.fisher {
            cell(fisher_paper(model.beta_tau(), v, c))?
        } else {
            String::new()
        });
        if columns.free_energy {
            match free_energy_point(model, v, 0.0, mode) {
                Ok(p) if p.f_receiver.is_finite() => {
                    row.push(fmt(p.f_receiver));
                    row.push(p.regime.to_string());
                }
                Ok(_) | Err(Error::NumericOverflow(_)) => {
                    row.push("overflow".into());
                    row.push(String::new());
                }
                Err(e) => return Err(e),
            }
        } else {
            row.extend([String::new(), String::new()]);
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// A gnuplot script plotting the filled columns of `csv` against `v`.
pub fn plot_script(csv: &Path, columns: SweepColumns) -> String {
    let mut series = Vec::new();
    if columns.kld {
        series.push((3, "kld_simplified"));
        series.push((4, "kld_closed_form"));
    }
    if columns.fisher {
        series.push((5, "fisher"));
    }
    if columns.free_energy {
        series.push((6, "f_receiver"));
    }
    let name = csv.file_name().map_or_else(
        || csv.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    );
    let mut s = String::new();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set key autotitle columnhead").unwrap();
    writeln!(s, "set xlabel 'v'").unwrap();
    let plots: Vec<String> = series
        .iter()
        .map(|(col, title)| format!("'{name}' using 1:{col} with lines title '{title}'"))
        .collect();
    writeln!(s, "plot {}", plots.join(", \\\n     ")).unwrap();
    s
}
