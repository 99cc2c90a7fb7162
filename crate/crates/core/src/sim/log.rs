//! Event log lines are `t KIND id payload`. PATH payloads list the leader's
//! segments separated by `;`, each either `C,t_i,t_f,p0,v0,u` or
//! `Q,t_i,t_f,p0,v0,a,b`.

use super::path::LeaderPath;
use crate::error::{Error, Result};
use crate::platoon::PlatoonId;
use crate::trajectory::{Law, Segment};

pub fn format_path(segments: &[Segment]) -> String {
    segments
        .iter()
        .map(|s| match s.law {
            Law::ConstantAccel { u } => format!("C,{},{},{},{},{}", s.t_i, s.t_f, s.p0, s.v0, u),
            Law::Cubic { a, b } => format!("Q,{},{},{},{},{},{}", s.t_i, s.t_f, s.p0, s.v0, a, b),
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse(format!("line {line}: {}", msg.into()))
}

pub fn parse_path(text: &str, line: usize) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    for item in text.split(';') {
        let mut fields = item.split(',');
        let tag = fields.next().unwrap_or("");
        let nums: Vec<f64> = fields
            .map(|f| f.parse::<f64>().map_err(|e| parse_error(line, format!("bad number {f:?}: {e}"))))
            .collect::<Result<_>>()?;
        let seg = match (tag, nums.as_slice()) {
            ("C", &[t_i, t_f, p0, v0, u]) => Segment::constant(t_i, t_f, p0, v0, u),
            ("Q", &[t_i, t_f, p0, v0, a, b]) => Segment::cubic(t_i, t_f, p0, v0, a, b),
            _ => return Err(parse_error(line, format!("bad segment {item:?}"))),
        };
        out.push(seg);
    }
    if out.is_empty() {
        return Err(parse_error(line, "empty path"));
    }
    Ok(out)
}

/// Leader motion of platoon `id` as last recorded in `log`.
pub fn leader_path_from_log(log: &str, id: PlatoonId) -> Result<LeaderPath> {
    let mut found = None;
    for (n, line) in log.lines().enumerate() {
        let mut parts = line.splitn(4, ' ');
        let (Some(_), Some(kind), Some(pid), Some(payload)) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            continue;
        };
        if kind != "PATH" || pid.parse::<PlatoonId>().ok() != Some(id) {
            continue;
        }
        found = Some(parse_path(payload, n + 1)?);
    }
    found.map(LeaderPath::new).ok_or(Error::UnknownPlatoon(id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_round_trip_exactly() {
        let segs = vec![
            Segment::cubic(0.1, 7.3, 0.0, 11.1, 0.0123456789, -0.3),
            Segment::constant(7.3, f64::INFINITY, 200.0, 18.0, 0.0),
        ];
        let text = format_path(&segs);
        assert_eq!(parse_path(&text, 1).unwrap(), segs);
    }

    #[test]
    fn last_path_wins_and_unknown_ids_fail() {
        let a = format_path(&[Segment::constant(0.0, f64::INFINITY, 0.0, 10.0, 0.0)]);
        let b = format_path(&[Segment::constant(0.0, f64::INFINITY, 0.0, 12.0, 0.0)]);
        let log = format!("0 ARRIVE 3 N.S\n0 PATH 3 {a}\n1 PATH 3 {b}\n");
        let p = leader_path_from_log(&log, 3).unwrap();
        assert_eq!(p.segments()[0].v0, 12.0);
        assert!(matches!(leader_path_from_log(&log, 4), Err(Error::UnknownPlatoon(4))));
        assert!(parse_path("C,1,2", 7).is_err());
    }
}
