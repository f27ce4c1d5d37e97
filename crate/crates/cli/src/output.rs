//! CSV conventions: a header row, `.` decimals in their shortest
//! round-trip form, and vectors joined with `;`.

use std::io::Write;

/// Shortest representation of `x` that parses back to the same `f64`.
pub fn real(x: f64) -> String {
    format!("{x:?}")
}

pub fn reals(v: &[f64]) -> String {
    v.iter().map(|&x| real(x)).collect::<Vec<_>>().join(";")
}

pub fn ints<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

pub fn optional_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub struct Table<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> Table<W> {
    pub fn new(out: W, header: &[&str]) -> csv::Result<Self> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, cells: I) -> csv::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(cells)
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.writer.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0, -2.5e-12, std::f64::consts::PI, 1e300] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(real(1.0), "1.0");
        assert_eq!(reals(&[0.5, -1.0]), "0.5;-1.0");
        assert_eq!(ints(&[3, -1]), "3;-1");
        assert_eq!(optional_real(None), "");
    }

    #[test]
    fn table_layout() {
        let mut buf = Vec::new();
        let mut t = Table::new(&mut buf, &["T", "target_class"]).unwrap();
        t.row(["3.0", "1;2"]).unwrap();
        t.finish().unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "T,target_class\n3.0,1;2\n");
    }
}
