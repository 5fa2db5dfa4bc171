//! Uniformly sampled mission log and its CSV form.

use super::SimError;
use std::io::{Read, Write};
use std::path::Path;

/// CSV column names, in order.
pub const CSV_HEADER: [&str; 35] = [
    "time", "state", "X", "Y", "phi", "v", "w", "e1", "e2", "e3", "s1", "s2", "u1", "u2", "vL", "vR", "q1", "q2",
    "q3", "q4", "qd1", "qd2", "qd3", "qd4", "tau1", "tau2", "tau3", "tau4", "eeX", "eeY", "eeZ", "tgtX", "tgtY",
    "tgtZ", "event",
];

/// One logged instant. Chassis position in m, headings and joint angles in
/// degrees, rates in degrees per second, errors `e1`, `e2` in m, tool
/// positions in mm.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogRow {
    pub time: f64,
    pub state: String,
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub v: f64,
    pub w: f64,
    pub e: [f64; 3],
    pub s: [f64; 2],
    pub u: [f64; 2],
    pub track: [f64; 2],
    pub q: [f64; 4],
    pub qd: [f64; 4],
    pub tau: [f64; 4],
    pub ee: [f64; 3],
    pub target: [f64; 3],
    pub event: String,
}

impl LogRow {
    fn numbers(&self) -> Vec<f64> {
        let mut v = vec![self.x, self.y, self.phi, self.v, self.w];
        v.extend(self.e);
        v.extend(self.s);
        v.extend(self.u);
        v.extend(self.track);
        v.extend(self.q);
        v.extend(self.qd);
        v.extend(self.tau);
        v.extend(self.ee);
        v.extend(self.target);
        v
    }

    fn from_fields(time: f64, state: String, n: &[f64], event: String) -> Self {
        let a = |i: usize| n[i];
        LogRow {
            time,
            state,
            x: a(0),
            y: a(1),
            phi: a(2),
            v: a(3),
            w: a(4),
            e: [a(5), a(6), a(7)],
            s: [a(8), a(9)],
            u: [a(10), a(11)],
            track: [a(12), a(13)],
            q: [a(14), a(15), a(16), a(17)],
            qd: [a(18), a(19), a(20), a(21)],
            tau: [a(22), a(23), a(24), a(25)],
            ee: [a(26), a(27), a(28)],
            target: [a(29), a(30), a(31)],
            event,
        }
    }

    /// Whether the end effector is following a sweep raster.
    pub fn in_sweep(&self) -> bool {
        self.state.starts_with("StageI.") && self.state.ends_with(".sweep")
    }

    pub fn events(&self) -> impl Iterator<Item = &str> {
        self.event.split(';').filter(|e| !e.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimLog {
    pub dt: f64,
    pub rows: Vec<LogRow>,
}

impl SimLog {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(csv_error)?;
        for r in &self.rows {
            let mut rec = Vec::with_capacity(CSV_HEADER.len());
            rec.push(r.time.to_string());
            rec.push(r.state.clone());
            rec.extend(r.numbers().iter().map(f64::to_string));
            rec.push(r.event.clone());
            w.write_record(&rec).map_err(csv_error)?;
        }
        w.flush().map_err(|e| SimError::Io(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        let file = std::fs::File::create(path.as_ref())
            .map_err(|e| SimError::Io(format!("{}: {e}", path.as_ref().display())))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads a log written by [`SimLog::write_csv`]. The step is taken from
    /// the first two timestamps.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, SimError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(csv_error)?;
        if header.iter().ne(CSV_HEADER.iter().copied()) {
            return Err(SimError::Parse("CSV header does not match the log schema".into()));
        }
        let mut rows = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_error)?;
            let num = |i: usize| -> Result<f64, SimError> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|e| SimError::Parse(format!("row {}, column {}: {e}", line + 1, CSV_HEADER[i])))
            };
            let time = num(0)?;
            let numbers = (2..CSV_HEADER.len() - 1).map(num).collect::<Result<Vec<_>, _>>()?;
            rows.push(LogRow::from_fields(
                time,
                rec[1].to_string(),
                &numbers,
                rec[CSV_HEADER.len() - 1].to_string(),
            ));
        }
        let dt = if rows.len() >= 2 { rows[1].time - rows[0].time } else { 0.0 };
        Ok(Self { dt, rows })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| SimError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// Time of the first row carrying `event`.
    pub fn event_time(&self, event: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.events().any(|e| e == event))
            .map(|r| r.time)
    }
}

fn csv_error(e: csv::Error) -> SimError {
    match e.kind() {
        csv::ErrorKind::Io(_) => SimError::Io(e.to_string()),
        _ => SimError::Parse(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> LogRow {
        LogRow {
            time: t,
            state: "StageI.1.sweep".into(),
            x: 0.1,
            y: -1.0 / 3.0,
            q: [1e-300, -0.0, 123456.789, f64::MIN_POSITIVE],
            event: "K1;sweep_start_1".into(),
            ..LogRow::default()
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let log = SimLog {
            dt: 0.5,
            rows: vec![row(0.0), row(0.5)],
        };
        let text = log.to_csv_string();
        let back = SimLog::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, log);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(matches!(
            SimLog::read_csv("a,b\n1,2\n".as_bytes()),
            Err(SimError::Parse(_))
        ));
    }
}
