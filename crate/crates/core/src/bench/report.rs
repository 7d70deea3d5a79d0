use std::io::Write;

use serde::Serializer;

use super::BenchRecord;
use crate::broad_search::TraceRow;
use crate::narrow_phase::Side;

/// Column set and order of benchmark CSV files.
pub const CSV_HEADER: &str = "scene,mode,k,repetition,points_a,points_b,index_s,broad_s,narrow_s,total_s,h,h_ab,h_ba,witness_a,witness_b,witness_side,iterations_ab,iterations_ba,candidate_pairs,fallback,speedup_vs_nois";

/// Seconds at millisecond resolution.
pub(super) fn secs<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:.3}"))
}

pub fn write_records<W: Write>(records: &[BenchRecord], w: W) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_HEADER.split(','))?;
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Per-sweep broad-phase trace, one line per sweep.
pub fn write_trace<W: Write>(mut w: W, side: Side, rows: &[TraceRow], header: bool) -> std::io::Result<()> {
    if header {
        writeln!(w, "side,iteration,radius,active,gray,newly_covered,retired")?;
    }
    for t in rows {
        writeln!(
            w,
            "{side},{},{:.6},{},{},{},{}",
            t.iteration, t.radius, t.active, t.gray, t.newly_covered, t.retired
        )?;
    }
    Ok(())
}

/// Min and median total time of the repetitions of one (mode, k).
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mode: String,
    pub k: Option<u32>,
    pub runs: usize,
    pub min_s: f64,
    pub median_s: f64,
    pub h: f64,
}

pub fn summarize(records: &[BenchRecord]) -> Vec<Summary> {
    let mut keys: Vec<(String, Option<u32>)> = Vec::new();
    for r in records {
        let key = (r.mode.clone(), r.k);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(mode, k)| {
            let rows: Vec<&BenchRecord> = records.iter().filter(|r| r.mode == mode && r.k == k).collect();
            let mut times: Vec<f64> = rows.iter().map(|r| r.total_s).collect();
            times.sort_by(f64::total_cmp);
            let n = times.len();
            let median = if n % 2 == 1 {
                times[n / 2]
            } else {
                0.5 * (times[n / 2 - 1] + times[n / 2])
            };
            Summary {
                runs: n,
                min_s: times[0],
                median_s: median,
                h: rows[0].h,
                mode,
                k,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(mode: &str, k: Option<u32>, total: f64) -> BenchRecord {
        BenchRecord {
            scene: "translation synthetic:blob:10:1 x 0.5".into(),
            mode: mode.into(),
            k,
            repetition: 0,
            points_a: 10,
            points_b: 10,
            index_s: 0.0012,
            broad_s: 0.25,
            narrow_s: 0.0,
            total_s: total,
            h: 1.25,
            h_ab: 1.25,
            h_ba: 0.5,
            witness_a: 3,
            witness_b: 7,
            witness_side: "ab".into(),
            iterations_ab: 12,
            iterations_ba: 9,
            candidate_pairs: 400,
            fallback: false,
            speedup_vs_nois: None,
        }
    }

    #[test]
    fn csv_golden() {
        let mut rows = vec![record("full", Some(7), 0.5), record("brute", None, 2.0)];
        rows[0].speedup_vs_nois = Some(2.5);
        rows[1].scene = "raw-pair \"a,b\"".into();
        let mut out = Vec::new();
        write_records(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let expected = format!(
            "{CSV_HEADER}\n\
             translation synthetic:blob:10:1 x 0.5,full,7,0,10,10,0.001,0.250,0.000,0.500,1.25,1.25,0.5,3,7,ab,12,9,400,false,2.5\n\
             \"raw-pair \"\"a,b\"\"\",brute,,0,10,10,0.001,0.250,0.000,2.000,1.25,1.25,0.5,3,7,ab,12,9,400,false,\n"
        );
        assert_eq!(text, expected);
    }

    #[test]
    fn min_and_median() {
        let rows = vec![
            record("full", Some(7), 0.3),
            record("full", Some(7), 0.1),
            record("full", Some(7), 0.2),
            record("nois", Some(7), 1.0),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].min_s, s[0].median_s, s[0].runs), (0.1, 0.2, 3));
        assert_eq!(s[1].median_s, 1.0);
    }

    #[test]
    fn trace_lines() {
        let rows = [TraceRow {
            iteration: 1,
            radius: crate::geom::SQRT_3,
            active: 4,
            gray: 2,
            newly_covered: 2,
            retired: 0,
        }];
        let mut out = Vec::new();
        write_trace(&mut out, Side::BtoA, &rows, true).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "side,iteration,radius,active,gray,newly_covered,retired\nba,1,1.732051,4,2,2,0\n"
        );
    }
}
