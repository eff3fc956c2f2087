//! Tabular run summaries printed by the command-line front end.

use std::fmt;

/// Acceptance band around a reference value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// |v − r|/|r| ≤ x
    Relative(f64),
    /// |v − r| ≤ x
    Absolute(f64),
    /// r/x ≤ v ≤ r·x
    Factor(f64),
}

impl Tolerance {
    pub fn accepts(self, value: f64, reference: f64) -> bool {
        match self {
            Tolerance::Relative(x) => (value - reference).abs() <= x * reference.abs(),
            Tolerance::Absolute(x) => (value - reference).abs() <= x,
            Tolerance::Factor(x) => value >= reference / x && value <= reference * x,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Relative(x) => write!(f, "±{}%", 100.0 * x),
            Tolerance::Absolute(x) => write!(f, "±{:.3}", Sig(*x)),
            Tolerance::Factor(x) => write!(f, "×/÷{:.3}", Sig(*x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub value: f64,
    pub unit: String,
    pub reference: Option<f64>,
    pub tolerance: Option<Tolerance>,
}

impl ReportRow {
    /// (v − r)/r, only where a nonzero reference exists.
    pub fn deviation(&self) -> Option<f64> {
        self.reference.filter(|r| *r != 0.0).map(|r| (self.value - r) / r)
    }

    pub fn passes(&self) -> Option<bool> {
        Some(self.tolerance?.accepts(self.value, self.reference?))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub title: String,
    pub rows: Vec<ReportRow>,
    /// Free-form lines printed under the table.
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(title: impl Into<String>) -> Self {
        RunReport { title: title.into(), ..RunReport::default() }
    }

    pub fn value(&mut self, name: impl Into<String>, value: f64, unit: impl Into<String>) -> &mut Self {
        self.rows.push(ReportRow { name: name.into(), value, unit: unit.into(), reference: None, tolerance: None });
        self
    }

    pub fn compare(
        &mut self,
        name: impl Into<String>,
        value: f64,
        unit: impl Into<String>,
        reference: f64,
        tolerance: Tolerance,
    ) -> &mut Self {
        self.rows.push(ReportRow {
            name: name.into(),
            value,
            unit: unit.into(),
            reference: Some(reference),
            tolerance: Some(tolerance),
        });
        self
    }

    pub fn note(&mut self, line: impl Into<String>) -> &mut Self {
        self.notes.push(line.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Rows that carry a reference.
    pub fn compared(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.reference.is_some())
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.passes() != Some(false))
    }

    /// Aligned plain-text table.
    pub fn render(&self) -> String {
        let header = ["quantity", "value", "unit", "reference", "deviation", "tolerance", "status"];
        let mut cells: Vec<[String; 7]> = vec![header.map(String::from)];
        for r in &self.rows {
            cells.push([
                r.name.clone(),
                format!("{:.6}", Sig(r.value)),
                r.unit.clone(),
                r.reference.map(|v| format!("{:.6}", Sig(v))).unwrap_or_default(),
                r.deviation().map(|d| format!("{:+.2}%", 100.0 * d)).unwrap_or_default(),
                r.tolerance.map(|t| t.to_string()).unwrap_or_default(),
                match r.passes() {
                    Some(true) => "ok".into(),
                    Some(false) => "FAIL".into(),
                    None => String::new(),
                },
            ]);
        }
        let mut widths = [0usize; 7];
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        if !self.title.is_empty() {
            out.push_str(&self.title);
            out.push('\n');
        }
        for (i, row) in cells.iter().enumerate() {
            let mut line = String::new();
            for (k, (c, w)) in row.iter().zip(widths).enumerate() {
                let pad = w - c.chars().count();
                if k == 1 || k == 3 || k == 4 {
                    line.push_str(&" ".repeat(pad));
                    line.push_str(c);
                } else {
                    line.push_str(c);
                    line.push_str(&" ".repeat(pad));
                }
                line.push_str("  ");
            }
            out.push_str(line.trim_end());
            out.push('\n');
            if i == 0 {
                let total: usize = widths.iter().sum::<usize>() + 2 * 6;
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
        }
        for n in &self.notes {
            out.push_str(n);
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Significant-figure formatting: `{:.N}` gives N significant digits,
/// switching to exponent form outside [1e-3, 1e6).
struct Sig(f64);

impl fmt::Display for Sig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(6).max(1);
        let v = self.0;
        let a = v.abs();
        if v == 0.0 || !v.is_finite() {
            return write!(f, "{v}");
        }
        if !(1e-3..1e6).contains(&a) {
            return write!(f, "{:.*e}", digits - 1, v);
        }
        let decimals = (digits as i32 - 1 - a.log10().floor() as i32).max(0) as usize;
        write!(f, "{v:.decimals$}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances() {
        assert!(Tolerance::Relative(0.02).accepts(1.019, 1.0));
        assert!(!Tolerance::Relative(0.02).accepts(1.021, 1.0));
        assert!(Tolerance::Absolute(0.005).accepts(0.0364, 0.036));
        assert!(Tolerance::Factor(2.0).accepts(38.0, 30.0));
        assert!(!Tolerance::Factor(2.0).accepts(14.0, 30.0));
    }

    #[test]
    fn deviation_only_with_reference() {
        let mut r = RunReport::new("t");
        r.value("a", 1.0, "s").compare("b", 1.1, "s", 1.0, Tolerance::Relative(0.05));
        assert_eq!(r.rows[0].deviation(), None);
        assert!((r.rows[1].deviation().unwrap() - 0.1).abs() < 1e-12);
        assert!(!r.all_pass());
        let text = r.render();
        assert!(text.contains("FAIL"));
        assert!(text.contains("+10.00%"));
        let unit_cols: Vec<usize> = text.lines().skip(3).map(|l| l.find(" s").unwrap()).collect();
        assert_eq!(unit_cols[0], unit_cols[1], "{text}");
    }

    #[test]
    fn significant_figures() {
        assert_eq!(format!("{:.4}", Sig(236.78e-6)), "2.368e-4");
        assert_eq!(format!("{:.4}", Sig(189.42)), "189.4");
        assert_eq!(format!("{:.3}", Sig(0.0365)), "0.0365");
    }
}
