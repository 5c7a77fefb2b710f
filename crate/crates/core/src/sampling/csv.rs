use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::PointRef;

use super::Net;

pub const NET_HEADER: &str = "index,part_id,coord0,coord1,mu";

/// Writes `index,part_id,coord0,coord1,mu` rows with 17 significant digits,
/// enough to round-trip every `f64`.
pub fn write_net_csv(net: &Net, path: &Path) -> Result<()> {
    std::fs::write(path, net_csv_string(net))?;
    Ok(())
}

pub fn net_csv_string(net: &Net) -> String {
    let mut out = String::with_capacity(64 * net.len() + 32);
    out.push_str(NET_HEADER);
    out.push('\n');
    for (i, (p, mu)) in net.points.iter().zip(&net.weights).enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{:.16e},{:.16e},{:.16e}",
            p.part, p.coords[0], p.coords[1], mu
        );
    }
    out
}

/// Reads points and weights written by [`write_net_csv`].
pub fn read_net_csv(path: &Path) -> Result<(Vec<PointRef>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    parse_net_csv(&text)
}

pub fn parse_net_csv(text: &str) -> Result<(Vec<PointRef>, Vec<f64>)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == NET_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "net csv line 1: expected header `{NET_HEADER}`, got `{}`",
                other.map(|(_, h)| h).unwrap_or("")
            )))
        }
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Config(format!("net csv line {}: {what}", ln + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(bad(&format!("expected 5 fields, got {}", fields.len())));
        }
        let index: usize = fields[0].parse().map_err(|_| bad("bad index"))?;
        if index != points.len() {
            return Err(bad(&format!("index {index} out of sequence")));
        }
        let part: usize = fields[1].parse().map_err(|_| bad("bad part_id"))?;
        let num = |s: &str, name: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad {name}")));
        points.push(PointRef {
            part,
            coords: [num(fields[2], "coord0")?, num(fields[3], "coord1")?],
        });
        weights.push(num(fields[4], "mu")?);
    }
    Ok((points, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpaceModel;
    use crate::sampling::{sample_net, SamplerConfig, Strategy};

    #[test]
    fn round_trip_is_exact() {
        let s = SpaceModel::two_circles(1.0, 0.7).unwrap();
        let net = sample_net(&s, &SamplerConfig::new(Strategy::UniformRandom, 5, 0.05)).unwrap();
        let text = net_csv_string(&net);
        assert!(text.starts_with("index,part_id,coord0,coord1,mu\n"));
        let (pts, w) = parse_net_csv(&text).unwrap();
        assert_eq!(pts, net.points);
        assert_eq!(w, net.weights);
    }

    #[test]
    fn rejects_bad_rows() {
        let err = parse_net_csv("index,part_id,coord0,coord1,mu\n0,0,0.5,0\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_net_csv("i,p\n").is_err());
    }
}
