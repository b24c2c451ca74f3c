//! CSV output. Numbers use Rust's shortest round-trip `Display` for `f64`,
//! which is platform independent.

use can_coord::model::SweepRow;
use can_coord::Scenario;

pub struct SweepTable {
    pub param: String,
    pub objectives: Vec<String>,
    pub rows: Vec<(f64, Vec<f64>, f64)>,
}

impl SweepTable {
    pub fn new(scenario: &Scenario, param: &str, rows: &[SweepRow], products: &[f64]) -> Self {
        let objectives: Vec<String> = scenario.objectives().iter().map(|o| o.name.clone()).collect();
        let rows = rows
            .iter()
            .zip(products)
            .map(|(row, &product)| {
                let values = objectives.iter().map(|o| row.objectives[o]).collect();
                (row.value, values, product)
            })
            .collect();
        Self {
            param: param.to_string(),
            objectives,
            rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut header = vec![self.param.clone()];
        header.extend(self.objectives.iter().cloned());
        header.push("product".into());
        let mut out = csv_line(&header);
        for (value, objectives, product) in &self.rows {
            let mut cells = vec![value.to_string()];
            cells.extend(objectives.iter().map(f64::to_string));
            cells.push(product.to_string());
            out.push_str(&csv_line(&cells));
        }
        out
    }

    /// Value of the parameter at the first row with the largest product.
    pub fn argmax(&self) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for &(v, _, p) in &self.rows {
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((v, p));
            }
        }
        best.map(|(v, _)| v)
    }
}

pub fn csv_line<S: AsRef<str>>(cells: &[S]) -> String {
    let mut line = cells
        .iter()
        .map(|c| escape(c.as_ref()))
        .collect::<Vec<_>>()
        .join(",");
    line.push('\n');
    line
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting() {
        assert_eq!(csv_line(&["a", "b,c", "d\"e"]), "a,\"b,c\",\"d\"\"e\"\n");
    }

    #[test]
    fn shortest_round_trip_floats() {
        let cells = [0.1f64, 6.0, 1.522997974471263e-8].map(|v| v.to_string());
        assert_eq!(csv_line(&cells), "0.1,6,0.00000001522997974471263\n");
        for c in &cells {
            let back: f64 = c.parse().unwrap();
            assert_eq!(back.to_string(), *c);
        }
    }
}
