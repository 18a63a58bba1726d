//! Level-crossing records and the up-crossing suppression rule.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, Result};
use crate::trace::SampledTrace;

/// Zero-length on/off periods shorter than this are collapsed.
pub const DEGENERATE_INTERVAL: f64 = 1e-12;

/// Ordered up/down crossings of a level over the horizon [start, end].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub level: f64,
    pub start: f64,
    pub end: f64,
    pub initially_on: bool,
    pub up_times: Vec<f64>,
    pub down_times: Vec<f64>,
}

impl CrossingRecord {
    /// Builds the record of the indicator of a sorted, disjoint interval union.
    pub fn from_intervals(level: f64, intervals: &[(f64, f64)], start: f64, end: f64) -> Self {
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for &(lo, hi) in intervals {
            let (lo, hi) = (lo.max(start), hi.min(end));
            if hi - lo <= DEGENERATE_INTERVAL {
                continue;
            }
            match merged.last_mut() {
                Some(last) if lo - last.1 <= DEGENERATE_INTERVAL => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        let mut rec = Self {
            level,
            start,
            end,
            initially_on: false,
            up_times: Vec::new(),
            down_times: Vec::new(),
        };
        for (k, &(lo, hi)) in merged.iter().enumerate() {
            if k == 0 && lo <= start {
                rec.initially_on = true;
            } else {
                rec.up_times.push(lo);
            }
            if hi < end {
                rec.down_times.push(hi);
            }
        }
        rec
    }

    /// Builds the record of 1(value >= level) on a uniformly sampled trace;
    /// each crossing is dated at the first sample in the new state.
    pub fn from_sampled(trace: &SampledTrace, level: f64) -> Self {
        let mut rec = Self {
            level,
            start: trace.t0,
            end: trace.t0 + trace.dt * trace.values.len().saturating_sub(1) as f64,
            initially_on: trace.values.first().is_some_and(|&v| v >= level),
            up_times: Vec::new(),
            down_times: Vec::new(),
        };
        let mut on = rec.initially_on;
        for (k, &v) in trace.values.iter().enumerate().skip(1) {
            let now = v >= level;
            if now != on {
                let t = trace.time(k);
                if now {
                    rec.up_times.push(t);
                } else {
                    rec.down_times.push(t);
                }
                on = now;
            }
        }
        rec
    }

    /// On intervals implied by the record, clipped to the horizon.
    pub fn on_intervals(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut ups = self.up_times.iter().copied().peekable();
        let mut current = if self.initially_on {
            Some(self.start)
        } else {
            None
        };
        for &d in &self.down_times {
            if current.is_none() {
                current = ups.next();
            }
            if let Some(u) = current.take() {
                out.push((u, d));
            }
        }
        if current.is_none() {
            current = ups.next();
        }
        if let Some(u) = current {
            out.push((u, self.end));
        }
        out
    }

    /// Checks that ups and downs strictly alternate, starting from the initial state.
    pub fn is_interleaved(&self) -> bool {
        let mut events: Vec<(f64, bool)> = self
            .up_times
            .iter()
            .map(|&t| (t, true))
            .chain(self.down_times.iter().map(|&t| (t, false)))
            .collect();
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut on = self.initially_on;
        let mut last = f64::NEG_INFINITY;
        for (t, up) in events {
            if up == on || t <= last {
                return false;
            }
            on = up;
            last = t;
        }
        true
    }

    /// Complete on durations B_n (an up-crossing followed by a down-crossing).
    pub fn on_durations(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut j = 0;
        for &u in &self.up_times {
            while j < self.down_times.len() && self.down_times[j] <= u {
                j += 1;
            }
            if j < self.down_times.len() {
                out.push(self.down_times[j] - u);
            }
        }
        out
    }

    /// Complete off durations I_n (a down-crossing followed by an up-crossing).
    pub fn off_durations(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut j = 0;
        for &d in &self.down_times {
            while j < self.up_times.len() && self.up_times[j] <= d {
                j += 1;
            }
            if j < self.up_times.len() {
                out.push(self.up_times[j] - d);
            }
        }
        out
    }

    /// Up-crossing interarrival times V_n.
    pub fn interarrivals(&self) -> Vec<f64> {
        self.up_times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Fraction of the horizon spent on.
    pub fn on_fraction(&self) -> f64 {
        let on: f64 = self.on_intervals().iter().map(|(a, b)| b - a).sum();
        on / (self.end - self.start)
    }

    /// CSV rows `kind,time` with kind in {up, down}.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "time"])?;
        let mut events: Vec<(f64, &str)> = self
            .up_times
            .iter()
            .map(|&t| (t, "up"))
            .chain(self.down_times.iter().map(|&t| (t, "down")))
            .collect();
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, k) in events {
            w.write_record([k, &t.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Keeps the first up-crossing and drops every up-crossing within
/// `dead_time` of the last kept one. Each kept on period extends to the last
/// down-crossing before the next kept up-crossing.
pub fn suppress_upcrossings(rec: &CrossingRecord, dead_time: f64) -> Result<CrossingRecord> {
    non_negative("dead_time", dead_time)?;
    let mut kept: Vec<f64> = Vec::new();
    for &u in &rec.up_times {
        match kept.last() {
            Some(&last) if u - last < dead_time => {}
            _ => kept.push(u),
        }
    }
    let mut starts: Vec<f64> = Vec::with_capacity(kept.len() + 1);
    if rec.initially_on {
        starts.push(rec.start);
    }
    starts.extend(&kept);
    let mut downs = Vec::new();
    for (k, &s0) in starts.iter().enumerate() {
        let s1 = starts.get(k + 1).copied().unwrap_or(f64::INFINITY);
        let lo = rec.down_times.partition_point(|&d| d <= s0);
        let hi = rec.down_times.partition_point(|&d| d < s1);
        if hi > lo {
            downs.push(rec.down_times[hi - 1]);
        }
    }
    Ok(CrossingRecord {
        level: rec.level,
        start: rec.start,
        end: rec.end,
        initially_on: rec.initially_on,
        up_times: kept,
        down_times: downs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn always_off() {
        let r = CrossingRecord::from_intervals(1.0, &[], 0.0, 10.0);
        assert!(!r.initially_on && r.up_times.is_empty() && r.down_times.is_empty());
    }

    #[test]
    fn single_chord() {
        let r = CrossingRecord::from_intervals(1.0, &[(3.0, 7.0)], 0.0, 10.0);
        assert_eq!(r.up_times, vec![3.0]);
        assert_eq!(r.down_times, vec![7.0]);
        assert_eq!(r.on_durations(), vec![4.0]);
        assert!(r.is_interleaved());
    }

    #[test]
    fn degenerate_intervals_collapse() {
        let r = CrossingRecord::from_intervals(
            1.0,
            &[(1.0, 1.0 + 1e-14), (2.0, 3.0), (3.0 + 1e-13, 4.0)],
            0.0,
            10.0,
        );
        assert_eq!(r.up_times, vec![2.0]);
        assert_eq!(r.down_times, vec![4.0]);
    }

    #[test]
    fn renewal_identity() {
        let r = CrossingRecord::from_intervals(
            1.0,
            &[(0.0, 1.0), (2.0, 4.5), (7.0, 8.0), (9.5, 12.0)],
            0.0,
            12.0,
        );
        assert!(r.initially_on);
        let b = r.on_durations();
        let i = r.off_durations();
        let v = r.interarrivals();
        assert_eq!(b, vec![2.5, 1.0]);
        assert_eq!(i, vec![1.0, 2.5, 1.5]);
        for n in 0..v.len() {
            assert!((v[n] - (b[n] + i[n + 1])).abs() < 1e-12);
        }
        assert!((r.on_fraction() - 7.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn suppression_rule() {
        let rec = CrossingRecord::from_intervals(
            1.0,
            &[(0.0, 0.5), (1.0, 1.5), (2.0, 2.5), (10.0, 10.5)],
            -1.0,
            20.0,
        );
        let s = suppress_upcrossings(&rec, 3.0).unwrap();
        assert_eq!(s.up_times, vec![0.0, 10.0]);
        assert_eq!(s.down_times, vec![2.5, 10.5]);
        assert!(s.is_interleaved());
        assert_eq!(suppress_upcrossings(&rec, 0.0).unwrap(), rec);
        assert!(suppress_upcrossings(&rec, -1.0).is_err());
    }

    #[test]
    fn suppression_with_initial_on() {
        let rec =
            CrossingRecord::from_intervals(1.0, &[(0.0, 1.0), (2.0, 3.0), (9.0, 9.5)], 0.0, 20.0);
        let s = suppress_upcrossings(&rec, 8.0).unwrap();
        assert_eq!(s.up_times, vec![2.0]);
        assert_eq!(s.down_times, vec![1.0, 9.5]);
        assert!(s.is_interleaved());
    }

    #[test]
    fn sampled_record() {
        let tr = SampledTrace {
            t0: 0.0,
            dt: 0.5,
            values: vec![0.0, 2.0, 2.0, 0.5, 3.0],
        };
        let r = CrossingRecord::from_sampled(&tr, 1.0);
        assert_eq!(r.up_times, vec![0.5, 2.0]);
        assert_eq!(r.down_times, vec![1.5]);
    }
}
