use subspace_holonomy::{ComplexMatrix, C64};

fn entry(z: C64) -> String {
    // avoid printing "-0.000000"
    let clean = |x: f64| if x.abs() < 5e-7 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{re:.6}{sign}{:.6}i", im.abs())
}

pub fn matrix(m: &ComplexMatrix) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cols: Vec<String> = (0..m.ncols()).map(|j| entry(m[(i, j)])).collect();
            cols.join(", ")
        })
        .collect();
    format!("[{}]", rows.join("; "))
}

pub struct Table {
    rows: Vec<(String, String, String, f64)>,
}

impl Table {
    pub fn new() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn matrix_row(&mut self, name: &str, analytic: &ComplexMatrix, numeric: &ComplexMatrix) {
        let dev = subspace_holonomy::matkit::max_abs_deviation(analytic, numeric);
        self.rows.push((name.into(), matrix(analytic), matrix(numeric), dev));
    }

    pub fn scalar_row(&mut self, name: &str, analytic: f64, numeric: f64) {
        let dev = (analytic - numeric).abs();
        self.rows
            .push((name.into(), format!("{analytic:.3e}"), format!("{numeric:.3e}"), dev));
    }

    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.3).fold(0.0, f64::max)
    }

    pub fn print(&self) {
        let width = self.rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
        println!("{:<width$}  {:>10}", "quantity", "max |dev|");
        for (name, analytic, numeric, dev) in &self.rows {
            println!("{name:<width$}  {dev:>10.3e}");
            println!("{:<width$}    analytic  {analytic}", "");
            println!("{:<width$}    pipeline  {numeric}", "");
        }
    }
}
