//! Long-format `(series, x, y)` tables for external plotting.

use ovskale_core::kinetic::bifurcation::FoldRange;
use ovskale_core::vlasov::SweepRow;

use crate::io::{Cell, Table};

fn long_table() -> Table {
    Table::new(&["series", "x", "y"])
}

fn push(t: &mut Table, series: &str, x: f64, y: f64) {
    t.push(vec![Cell::from(series), Cell::Num(x), Cell::Num(y)]);
}

/// `ε` against the sup-gap; plot on log-log axes.
pub fn sweep(rows: &[SweepRow]) -> Table {
    let mut t = long_table();
    for r in rows {
        push(&mut t, "sup_gap", r.epsilon, r.sup_gap);
    }
    t
}

/// Term norms and their majorants against the term index.
pub fn majorant(term_norms: &[f64], majorants: &[f64]) -> Table {
    let mut t = long_table();
    for (n, v) in term_norms.iter().enumerate() {
        push(&mut t, "term_norm", n as f64, *v);
    }
    for (n, v) in majorants.iter().enumerate() {
        push(&mut t, "majorant", n as f64, *v);
    }
    t
}

/// `β ↦ T(α_s, β)` with the maximizer as its own one-point series.
pub fn horizon(curve: &[(f64, f64)], optimum: (f64, f64)) -> Table {
    let mut t = long_table();
    for &(b, v) in curve {
        push(&mut t, "T", b, v);
    }
    push(&mut t, "optimum", optimum.0, optimum.1);
    t
}

/// `b ↦ (c_low, c_high)`.
pub fn fold(curve: &[(f64, FoldRange)]) -> Table {
    let mut t = long_table();
    for (b, r) in curve {
        push(&mut t, "c_low", *b, r.c_low);
    }
    for (b, r) in curve {
        push(&mut t, "c_high", *b, r.c_high);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_inputs_give_header_only_tables() {
        assert_eq!(sweep(&[]).render(), "series,x,y\n");
        assert_eq!(fold(&[]).render(), "series,x,y\n");
        assert_eq!(majorant(&[], &[]).render(), "series,x,y\n");
    }

    #[test]
    fn majorant_rows_per_term() {
        let t = majorant(&[1.0, 0.5, 0.1], &[1.0, 0.8, 0.4]);
        assert_eq!(t.rows.len(), 6);
        assert_eq!(t.rows.iter().filter(|r| r[0] == Cell::from("majorant")).count(), 3);
    }
}
