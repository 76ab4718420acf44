//! JSON map specifications, report envelopes and grid writers.
//!
//! A map spec lists factors in application order:
//!
//! ```json
//! {"name": "basic", "factors": [{"b": [1, 0], "c": [0, 0], "delta": [1, 0],
//!                                "p": [[0, 0], [0, 0], [1, 0]]}]}
//! ```
//!
//! Complex numbers are `[re, im]` pairs and `p` is ascending in degree.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{Grid, GridJob};
use crate::error::{Error, Result};
use crate::henon::{ElementaryFactor, HenonChain, Point2};
use crate::poly::{BivariatePolynomial, Complex, PolyMap2, Polynomial};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub b: [f64; 2],
    #[serde(default)]
    pub c: [f64; 2],
    pub delta: [f64; 2],
    pub p: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub factors: Vec<FactorSpec>,
}

fn to_complex(v: [f64; 2]) -> Complex {
    Complex::new(v[0], v[1])
}

fn from_complex(c: Complex) -> [f64; 2] {
    [c.re, c.im]
}

impl MapSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map spec serializes")
    }

    pub fn to_chain(&self) -> Result<HenonChain> {
        if self.factors.is_empty() {
            return Err(Error::Validation {
                factor: None,
                message: "at least one factor is required".into(),
            });
        }
        let invalid = |i: usize, message: String| Error::Validation {
            factor: Some(i),
            message,
        };
        let factors = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let (b, c, delta) = (to_complex(f.b), to_complex(f.c), to_complex(f.delta));
                if b == Complex::new(0.0, 0.0) {
                    return Err(invalid(i, "b must be nonzero".into()));
                }
                if delta == Complex::new(0.0, 0.0) {
                    return Err(invalid(i, "delta must be nonzero".into()));
                }
                let p = Polynomial::new(f.p.iter().copied().map(to_complex).collect())
                    .map_err(|e| invalid(i, e.to_string()))?;
                if p.degree() < 2 || p.is_zero() {
                    return Err(invalid(
                        i,
                        format!("p must have degree at least 2, got {}", p.degree()),
                    ));
                }
                ElementaryFactor::new(b, c, delta, p).map_err(|e| invalid(i, e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        HenonChain::new(factors)
    }

    pub fn from_chain(h: &HenonChain, name: Option<String>) -> Self {
        let factors = h
            .factors()
            .iter()
            .map(|f| FactorSpec {
                b: from_complex(f.b()),
                c: from_complex(f.c()),
                delta: from_complex(f.delta()),
                p: f.p().coeffs().iter().copied().map(from_complex).collect(),
            })
            .collect();
        Self { name, factors }
    }
}

pub fn parse_map_spec(text: &str) -> Result<HenonChain> {
    MapSpec::from_json(text)?.to_chain()
}

pub fn chain_to_spec(h: &HenonChain) -> MapSpec {
    MapSpec::from_chain(h, None)
}

pub fn complex_json(c: Complex) -> Value {
    json!([c.re, c.im])
}

pub fn point_json(z: &Point2) -> Value {
    json!([complex_json(z.x), complex_json(z.y)])
}

pub fn bivariate_json(p: &BivariatePolynomial) -> Value {
    Value::Array(
        p.terms()
            .map(|((i, j), c)| json!({"x": i, "y": j, "c": complex_json(c)}))
            .collect(),
    )
}

pub fn polymap_json(m: &PolyMap2) -> Value {
    json!({"first": bivariate_json(&m.first), "second": bivariate_json(&m.second)})
}

/// `{tool_version, command, inputs, results, residuals}`.
pub fn report_envelope(command: &str, inputs: Value, results: Value, residuals: Value) -> Value {
    json!({
        "tool_version": TOOL_VERSION,
        "command": command,
        "inputs": inputs,
        "results": results,
        "residuals": residuals,
    })
}

pub fn grid_header(job: &GridJob) -> String {
    format!(
        "# henon-grid v1, mode={}, window={}, slice={}, budget={}",
        job.mode,
        job.window_label(),
        job.slice,
        job.budget
    )
}

/// Header line, then one comma-separated line per row, top row first.
pub fn grid_csv(grid: &Grid, job: &GridJob) -> String {
    let mut out = grid_header(job);
    out.push('\n');
    for row in grid.values.chunks(grid.columns) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// 16-bit binary PGM; pixel = round(value / max · 65535).
pub fn grid_pgm(grid: &Grid) -> Vec<u8> {
    let max = grid.stats.max;
    let mut out = format!("P5\n{} {}\n65535\n", grid.columns, grid.rows).into_bytes();
    out.reserve(grid.values.len() * 2);
    for v in &grid.values {
        let q = if max > 0.0 {
            (v / max * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        };
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

/// Sidecar text describing how to read a PGM back into values.
pub fn grid_meta(grid: &Grid, job: &GridJob) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", grid_header(job));
    let _ = writeln!(out, "format: pgm16");
    let _ = writeln!(out, "resolution: {}x{}", grid.columns, grid.rows);
    let _ = writeln!(out, "scale_max: {}", grid.stats.max.max(0.0));
    let _ = writeln!(out, "mapping: value = pixel / 65535 * scale_max");
    let _ = writeln!(out, "bounded_pixels: {}", grid.stats.bounded);
    out
}

pub fn grid_json(grid: &Grid, job: &GridJob) -> Value {
    json!({
        "header": grid_header(job),
        "columns": grid.columns,
        "rows": grid.rows,
        "values": grid.values,
        "stats": {
            "min": grid.stats.min,
            "max": grid.stats.max,
            "mean": grid.stats.mean,
            "bounded": grid.stats.bounded,
            "escaped": grid.stats.escaped,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{rasterize_grid, GridMode, Slice};
    use crate::random::random_chain;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    const BASIC: &str =
        r#"{"factors":[{"b":[1,0],"c":[0,0],"delta":[1,0],"p":[[0,0],[0,0],[1,0]]}]}"#;

    #[test]
    fn parses_basic_fixture() {
        let h = parse_map_spec(BASIC).unwrap();
        let expected = HenonChain::simple_real(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(h, expected);
    }

    #[test]
    fn zero_delta_names_factor() {
        let text = r#"{"factors":[
            {"b":[1,0],"delta":[1,0],"p":[[0,0],[0,0],[1,0]]},
            {"b":[1,0],"c":[0,0],"delta":[0,0],"p":[[0,0],[0,0],[1,0]]}]}"#;
        match parse_map_spec(text) {
            Err(Error::Validation {
                factor: Some(1),
                message,
            }) => assert!(message.contains("delta")),
            other => panic!("unexpected {other:?}"),
        }
        let first = r#"{"factors":[{"b":[1,0],"c":[0,0],"delta":[0,0],"p":[[0,0],[0,0],[1,0]]}]}"#;
        assert!(matches!(
            parse_map_spec(first),
            Err(Error::Validation {
                factor: Some(0),
                ..
            })
        ));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_map_spec("{"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_map_spec(r#"{"factors":[]}"#),
            Err(Error::Validation { factor: None, .. })
        ));
        let linear = r#"{"factors":[{"b":[1,0],"c":[0,0],"delta":[1,0],"p":[[0,0],[1,0]]}]}"#;
        assert!(matches!(
            parse_map_spec(linear),
            Err(Error::Validation {
                factor: Some(0),
                ..
            })
        ));
        let trailing_zero =
            r#"{"factors":[{"b":[1,0],"c":[0,0],"delta":[1,0],"p":[[0,0],[1,0],[0,0]]}]}"#;
        assert!(matches!(
            parse_map_spec(trailing_zero),
            Err(Error::Validation { .. })
        ));
        let zero_b = r#"{"factors":[{"b":[0,0],"c":[0,0],"delta":[1,0],"p":[[0,0],[0,0],[1,0]]}]}"#;
        assert!(matches!(
            parse_map_spec(zero_b),
            Err(Error::Validation {
                factor: Some(0),
                ..
            })
        ));
    }

    #[test]
    fn example_twisted_map_round_trips() {
        let w = Complex::from_polar(1.0, TAU / 3.0);
        let w2 = w * w;
        let text = format!(
            r#"{{"name":"F","factors":[{{"b":[{},{}],"c":[0,0],"delta":[{},{}],"p":[[0,0],[0,0],[{},{}]]}}]}}"#,
            w.re, w.im, w2.re, w2.im, w2.re, w2.im
        );
        let f = parse_map_spec(&text).unwrap();
        let expanded = f.expand().unwrap();
        let expected = PolyMap2::new(
            BivariatePolynomial::from_terms([((0, 1), w)]).unwrap(),
            BivariatePolynomial::from_terms([((0, 2), w2), ((1, 0), -w2)]).unwrap(),
        );
        assert!(expanded.equal_within(&expected, 1e-12).0);
        let again = parse_map_spec(&MapSpec::from_chain(&f, Some("F".into())).to_json()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn random_specs_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let h = random_chain(&mut rng, 3);
            let back = parse_map_spec(&chain_to_spec(&h).to_json()).unwrap();
            let z = crate::random::random_point(&mut rng, 2.0);
            assert_eq!(back.forward(z), h.forward(z));
        }
    }

    #[test]
    fn grid_writers() {
        let h = HenonChain::simple_real(&[0.0, 0.0, 1.0]).unwrap();
        let job = GridJob {
            center: (0.0, 0.0),
            width: 4.0,
            height: 4.0,
            resolution: (3, 2),
            slice: Slice::default(),
            mode: GridMode::GMax,
            budget: 50,
        };
        let grid = rasterize_grid(&h, &job, 1).unwrap();
        let csv = grid_csv(&grid, &job);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("# henon-grid v1, mode=gmax, window=0:0:4:4@3x2, slice="));
        assert!(lines[0].ends_with("budget=50"));
        assert_eq!(lines[1].split(',').count(), 3);

        let pgm = grid_pgm(&grid);
        let header = b"P5\n3 2\n65535\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(pgm.len(), header.len() + 12);
        let max_at = grid
            .values
            .iter()
            .position(|v| *v == grid.stats.max)
            .unwrap();
        let px = &pgm[header.len() + 2 * max_at..header.len() + 2 * max_at + 2];
        assert_eq!(px, &[0xff, 0xff]);
        assert!(grid_meta(&grid, &job).contains("scale_max: "));
    }

    #[test]
    fn envelope_shape() {
        let v = report_envelope("green", json!({"a": 1}), json!({}), json!({}));
        for key in ["tool_version", "command", "inputs", "results", "residuals"] {
            assert!(v.get(key).is_some());
        }
    }
}
