//! TSPLIB instance parsing and the integer distance oracle.
//!
//! Internal city indices are dense and 0-based; the original 1-based file
//! labels are kept for tour output. Distances follow the TSPLIB 95 rounding
//! rules exactly, so tour lengths are comparable against published optima.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::tour::Tour;

/// Full distance matrix is precomputed only below this size; larger
/// coordinate instances compute distances on demand.
pub const MATRIX_CACHE_LIMIT: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euc2d,
    Ceil2d,
    Geo,
    Att,
    /// EXPLICIT with EDGE_WEIGHT_FORMAT: FULL_MATRIX.
    Explicit,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid tour file: {0}")]
    InvalidTour(String),
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub n: usize,
    pub metric: Metric,
    /// Per-city coordinates; empty for EXPLICIT instances.
    pub coords: Vec<(f64, f64)>,
    /// Row-major n*n integer distances: the input matrix for EXPLICIT
    /// instances, or a cache for small coordinate instances.
    matrix: Option<Vec<i32>>,
    /// Original file labels per internal index (1-based in TSPLIB files).
    pub labels: Vec<i64>,
    pub bks: Option<i64>,
}

#[inline]
fn nint(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

#[inline]
fn d_euc2d(a: (f64, f64), b: (f64, f64)) -> i64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    nint((dx * dx + dy * dy).sqrt())
}

#[inline]
fn d_ceil2d(a: (f64, f64), b: (f64, f64)) -> i64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    (dx * dx + dy * dy).sqrt().ceil() as i64
}

// TSPLIB GEO: coordinates are DD.MM (degrees and minutes), truncated
// integer degrees, great-circle distance on a sphere of radius 6378.388.
const GEO_PI: f64 = 3.141592;
const GEO_RADIUS: f64 = 6378.388;

#[inline]
fn geo_rad(x: f64) -> f64 {
    let deg = x.trunc();
    let min = x - deg;
    GEO_PI * (deg + 5.0 * min / 3.0) / 180.0
}

#[inline]
fn d_geo(a: (f64, f64), b: (f64, f64)) -> i64 {
    let (lat_i, lon_i) = (geo_rad(a.0), geo_rad(a.1));
    let (lat_j, lon_j) = (geo_rad(b.0), geo_rad(b.1));
    let q1 = (lon_i - lon_j).cos();
    let q2 = (lat_i - lat_j).cos();
    let q3 = (lat_i + lat_j).cos();
    (GEO_RADIUS * (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).acos() + 1.0).trunc() as i64
}

#[inline]
fn d_att(a: (f64, f64), b: (f64, f64)) -> i64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    let r = ((dx * dx + dy * dy) / 10.0).sqrt();
    let t = nint(r);
    if (t as f64) < r {
        t + 1
    } else {
        t
    }
}

impl Instance {
    /// Builds an instance from raw coordinates, precomputing the distance
    /// matrix when small enough. Used by generators and tests.
    pub fn from_coords(name: &str, metric: Metric, coords: Vec<(f64, f64)>) -> Instance {
        assert!(metric != Metric::Explicit, "explicit instances need a matrix");
        let n = coords.len();
        let labels = (1..=n as i64).collect();
        let mut inst = Instance {
            name: name.to_string(),
            n,
            metric,
            coords,
            matrix: None,
            labels,
            bks: None,
        };
        if n <= MATRIX_CACHE_LIMIT {
            inst.fill_matrix();
        }
        inst
    }

    pub fn from_matrix(name: &str, n: usize, matrix: Vec<i32>) -> Instance {
        assert_eq!(matrix.len(), n * n);
        Instance {
            name: name.to_string(),
            n,
            metric: Metric::Explicit,
            coords: Vec::new(),
            matrix: Some(matrix),
            labels: (1..=n as i64).collect(),
            bks: None,
        }
    }

    fn fill_matrix(&mut self) {
        let n = self.n;
        let mut m = vec![0i32; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.compute_distance(i, j) as i32;
                m[i * n + j] = d;
                m[j * n + i] = d;
            }
        }
        self.matrix = Some(m);
    }

    #[inline]
    fn compute_distance(&self, i: usize, j: usize) -> i64 {
        let (a, b) = (self.coords[i], self.coords[j]);
        match self.metric {
            Metric::Euc2d => d_euc2d(a, b),
            Metric::Ceil2d => d_ceil2d(a, b),
            Metric::Geo => d_geo(a, b),
            Metric::Att => d_att(a, b),
            Metric::Explicit => unreachable!("explicit handled via matrix"),
        }
    }

    /// Exact integer distance between city indices `i` and `j`.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> i64 {
        if i == j {
            return 0;
        }
        match &self.matrix {
            Some(m) => m[i * self.n + j] as i64,
            None => self.compute_distance(i, j),
        }
    }

    pub fn attach_bks(&mut self, catalog: &HashMap<String, i64>) {
        if let Some(&v) = catalog.get(&self.name) {
            self.bks = Some(v);
        }
    }

    /// Parses a TSPLIB-format instance.
    pub fn parse_tsplib(text: &str) -> Result<Instance, ParseError> {
        let mut name = String::new();
        let mut dimension: Option<usize> = None;
        let mut metric: Option<Metric> = None;
        let mut weight_format: Option<String> = None;
        let mut coords: Vec<(f64, f64)> = Vec::new();
        let mut labels: Vec<i64> = Vec::new();
        let mut matrix_values: Vec<i64> = Vec::new();
        let mut saw_coord_section = false;
        let mut saw_weight_section = false;

        #[derive(PartialEq)]
        enum Section {
            Header,
            NodeCoords,
            EdgeWeights,
            Skip,
        }
        let mut section = Section::Header;

        for raw_line in text.lines() {
            let line = raw_line.trim();
            if line.is_empty() {
                continue;
            }
            if line == "EOF" {
                break;
            }

            // Section markers can appear after any header line.
            let upper = line.to_ascii_uppercase();
            if upper.starts_with("NODE_COORD_SECTION") {
                section = Section::NodeCoords;
                saw_coord_section = true;
                continue;
            }
            if upper.starts_with("EDGE_WEIGHT_SECTION") {
                section = Section::EdgeWeights;
                saw_weight_section = true;
                continue;
            }
            if upper.starts_with("DISPLAY_DATA_SECTION") || upper.starts_with("DEPOT_SECTION") {
                section = Section::Skip;
                continue;
            }
            if upper.starts_with("FIXED_EDGES_SECTION") {
                return Err(ParseError::MalformedHeader(
                    "FIXED_EDGES_SECTION is not supported".into(),
                ));
            }

            match section {
                Section::Header => {
                    let (key, value) = match line.split_once(':') {
                        Some((k, v)) => (k.trim().to_ascii_uppercase(), v.trim().to_string()),
                        None => (line.to_ascii_uppercase(), String::new()),
                    };
                    match key.as_str() {
                        "NAME" => name = value,
                        "TYPE" => {
                            if value.to_ascii_uppercase() != "TSP" {
                                return Err(ParseError::MalformedHeader(format!(
                                    "TYPE must be TSP, got {value}"
                                )));
                            }
                        }
                        "DIMENSION" => {
                            dimension = Some(value.parse().map_err(|_| {
                                ParseError::MalformedHeader(format!("bad DIMENSION: {value}"))
                            })?);
                        }
                        "EDGE_WEIGHT_TYPE" => {
                            metric = Some(match value.to_ascii_uppercase().as_str() {
                                "EUC_2D" => Metric::Euc2d,
                                "CEIL_2D" => Metric::Ceil2d,
                                "GEO" => Metric::Geo,
                                "ATT" => Metric::Att,
                                "EXPLICIT" => Metric::Explicit,
                                other => {
                                    return Err(ParseError::UnsupportedMetric(other.to_string()))
                                }
                            });
                        }
                        "EDGE_WEIGHT_FORMAT" => weight_format = Some(value.to_ascii_uppercase()),
                        // COMMENT, NODE_COORD_TYPE, DISPLAY_DATA_TYPE, ...
                        _ => {}
                    }
                }
                Section::NodeCoords => {
                    let mut it = line.split_whitespace();
                    let label: i64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| ParseError::MalformedHeader(format!("bad coord line: {line}")))?;
                    let x: f64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| ParseError::MalformedHeader(format!("bad coord line: {line}")))?;
                    let y: f64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| ParseError::MalformedHeader(format!("bad coord line: {line}")))?;
                    labels.push(label);
                    coords.push((x, y));
                }
                Section::EdgeWeights => {
                    for tok in line.split_whitespace() {
                        let v: i64 = tok.parse().map_err(|_| {
                            ParseError::MalformedHeader(format!("bad weight token: {tok}"))
                        })?;
                        matrix_values.push(v);
                    }
                }
                Section::Skip => {}
            }
        }

        let n = dimension
            .ok_or_else(|| ParseError::MalformedHeader("missing DIMENSION".into()))?;
        if n < 3 {
            return Err(ParseError::MalformedHeader(format!(
                "DIMENSION must be >= 3, got {n}"
            )));
        }
        let metric =
            metric.ok_or_else(|| ParseError::MalformedHeader("missing EDGE_WEIGHT_TYPE".into()))?;

        match metric {
            Metric::Explicit => {
                match weight_format.as_deref() {
                    Some("FULL_MATRIX") => {}
                    Some(other) => {
                        return Err(ParseError::UnsupportedMetric(format!("EXPLICIT/{other}")))
                    }
                    None => {
                        return Err(ParseError::MalformedHeader(
                            "EXPLICIT requires EDGE_WEIGHT_FORMAT".into(),
                        ))
                    }
                }
                if !saw_weight_section {
                    return Err(ParseError::MalformedHeader(
                        "missing EDGE_WEIGHT_SECTION".into(),
                    ));
                }
                if matrix_values.len() != n * n {
                    return Err(ParseError::DimensionMismatch {
                        expected: n * n,
                        found: matrix_values.len(),
                    });
                }
                let matrix: Vec<i32> = matrix_values.iter().map(|&v| v as i32).collect();
                Ok(Instance {
                    name,
                    n,
                    metric,
                    coords: Vec::new(),
                    matrix: Some(matrix),
                    labels: (1..=n as i64).collect(),
                    bks: None,
                })
            }
            _ => {
                if !saw_coord_section {
                    return Err(ParseError::MalformedHeader(
                        "missing NODE_COORD_SECTION".into(),
                    ));
                }
                if coords.len() != n {
                    return Err(ParseError::DimensionMismatch {
                        expected: n,
                        found: coords.len(),
                    });
                }
                let mut inst = Instance {
                    name,
                    n,
                    metric,
                    coords,
                    matrix: None,
                    labels,
                    bks: None,
                };
                if n <= MATRIX_CACHE_LIMIT {
                    inst.fill_matrix();
                }
                Ok(inst)
            }
        }
    }

    /// Emits the tour in TSPLIB TOUR format with the original 1-based labels.
    pub fn write_tour(&self, tour: &Tour) -> Result<String, ParseError> {
        if let Err(v) = tour.validate() {
            return Err(ParseError::InvalidTour(format!("{v:?}")));
        }
        if tour.n() != self.n {
            return Err(ParseError::InvalidTour(format!(
                "tour has {} cities, instance has {}",
                tour.n(),
                self.n
            )));
        }
        let mut out = String::new();
        let _ = writeln!(out, "NAME : {}.tour", self.name);
        let _ = writeln!(out, "TYPE : TOUR");
        let _ = writeln!(out, "DIMENSION : {}", self.n);
        let _ = writeln!(out, "TOUR_SECTION");
        for &c in tour.order() {
            let _ = writeln!(out, "{}", self.labels[c]);
        }
        let _ = writeln!(out, "-1");
        let _ = writeln!(out, "EOF");
        Ok(out)
    }

    /// Parses a TSPLIB TOUR file against this instance.
    pub fn parse_tour(&self, text: &str) -> Result<Tour, ParseError> {
        let mut in_section = false;
        let mut seq: Vec<usize> = Vec::with_capacity(self.n);
        let by_label: HashMap<i64, usize> = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i))
            .collect();
        'outer: for raw_line in text.lines() {
            let line = raw_line.trim();
            if line.is_empty() {
                continue;
            }
            if !in_section {
                if line.to_ascii_uppercase().starts_with("TOUR_SECTION") {
                    in_section = true;
                }
                continue;
            }
            for tok in line.split_whitespace() {
                if tok == "-1" || tok.eq_ignore_ascii_case("EOF") {
                    break 'outer;
                }
                let label: i64 = tok
                    .parse()
                    .map_err(|_| ParseError::InvalidTour(format!("bad label: {tok}")))?;
                let idx = *by_label
                    .get(&label)
                    .ok_or_else(|| ParseError::InvalidTour(format!("unknown label: {label}")))?;
                seq.push(idx);
            }
        }
        if seq.len() != self.n {
            return Err(ParseError::InvalidTour(format!(
                "tour has {} cities, instance has {}",
                seq.len(),
                self.n
            )));
        }
        let tour = Tour::from_order(self, seq);
        tour.validate()
            .map_err(|v| ParseError::InvalidTour(format!("{v:?}")))?;
        Ok(tour)
    }
}

/// Parses a best-known-solution catalog: one `name<space>integer` per line.
/// Blank lines and `#` comments are ignored.
pub fn parse_bks_catalog(text: &str) -> Result<HashMap<String, i64>, ParseError> {
    let mut map = HashMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let name = it
            .next()
            .ok_or_else(|| ParseError::MalformedHeader(format!("bad catalog line: {line}")))?;
        let value: i64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ParseError::MalformedHeader(format!("bad catalog line: {line}")))?;
        map.insert(name.to_string(), value);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn euc_file(n_header: usize, coords: &[(f64, f64)]) -> String {
        let mut s = String::new();
        s.push_str("NAME : tiny\nTYPE : TSP\n");
        s.push_str(&format!("DIMENSION : {n_header}\n"));
        s.push_str("EDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n");
        for (i, (x, y)) in coords.iter().enumerate() {
            s.push_str(&format!("{} {} {}\n", i + 1, x, y));
        }
        s.push_str("EOF\n");
        s
    }

    #[test]
    fn parse_minimal_euc2d() {
        let text = euc_file(3, &[(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)]);
        let inst = Instance::parse_tsplib(&text).unwrap();
        assert_eq!(inst.n, 3);
        assert_eq!(inst.metric, Metric::Euc2d);
        assert_eq!(inst.name, "tiny");
        assert_eq!(inst.distance(1, 2), 5);
    }

    #[test]
    fn parse_dimension_mismatch() {
        let text = euc_file(5, &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        match Instance::parse_tsplib(&text) {
            Err(ParseError::DimensionMismatch { expected: 5, found: 4 }) => {}
            other => panic!("expected DimensionMismatch, got {other:?}"),
        }
    }

    #[test]
    fn parse_unsupported_metric() {
        let text = "NAME : x\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : MAN_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 0\n3 2 0\nEOF\n";
        match Instance::parse_tsplib(text) {
            Err(ParseError::UnsupportedMetric(m)) => assert_eq!(m, "MAN_2D"),
            other => panic!("expected UnsupportedMetric, got {other:?}"),
        }
    }

    #[test]
    fn euc2d_rounding() {
        let inst = Instance::from_coords(
            "r",
            Metric::Euc2d,
            vec![(0.0, 0.0), (3.0, 4.0), (1.0, 1.0)],
        );
        assert_eq!(inst.distance(0, 1), 5);
        // nint(sqrt(2)) = nint(1.4142) = 1
        assert_eq!(inst.distance(0, 2), 1);
    }

    #[test]
    fn ceil2d_rounding() {
        let inst = Instance::from_coords("c", Metric::Ceil2d, vec![(0.0, 0.0), (1.0, 1.0), (3.0, 4.0)]);
        assert_eq!(inst.distance(0, 1), 2);
        assert_eq!(inst.distance(0, 2), 5);
    }

    #[test]
    fn att_rounding() {
        // nint-adjusted pseudo-Euclidean: distance is rounded up when nint
        // rounds down below the true value.
        let inst = Instance::from_coords("a", Metric::Att, vec![(0.0, 0.0), (10.0, 0.0)]);
        // r = sqrt(100/10) = sqrt(10) = 3.1623, t = 3 < r -> 4
        assert_eq!(inst.distance(0, 1), 4);
    }

    /// Independent straight-line transcription of the TSPLIB GEO formula,
    /// kept deliberately separate from the implementation in this module.
    fn geo_reference(a: (f64, f64), b: (f64, f64)) -> i64 {
        fn to_rad(x: f64) -> f64 {
            let deg = f64::trunc(x);
            3.141592 * (deg + 5.0 * (x - deg) / 3.0) / 180.0
        }
        let q1 = (to_rad(a.1) - to_rad(b.1)).cos();
        let q2 = (to_rad(a.0) - to_rad(b.0)).cos();
        let q3 = (to_rad(a.0) + to_rad(b.0)).cos();
        (6378.388 * f64::acos(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)) + 1.0) as i64
    }

    #[test]
    fn geo_matches_independent_transcription() {
        // 4-city hand instance with degree.minute coordinates.
        let coords = vec![(14.55, 69.10), (28.06, 15.34), (-12.30, 40.00), (51.29, 6.57)];
        let inst = Instance::from_coords("g", Metric::Geo, coords.clone());
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(inst.distance(i, j), geo_reference(coords[i], coords[j]));
                }
            }
        }
        // and a few random degree.minute pairs
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = |rng: &mut ChaCha8Rng| {
                let deg: i32 = rng.random_range(-80..80);
                let min: i32 = rng.random_range(0..60);
                deg as f64 + (min as f64) / 100.0 * deg.signum().max(0) as f64
            };
            let a = (p(&mut rng), p(&mut rng));
            let b = (p(&mut rng), p(&mut rng));
            assert_eq!(d_geo(a, b), geo_reference(a, b), "a={a:?} b={b:?}");
        }
    }

    #[test]
    fn explicit_full_matrix() {
        let text = "NAME: m\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 2 3\n2 0 4\n3 4 0\nEOF\n";
        let inst = Instance::parse_tsplib(text).unwrap();
        assert_eq!(inst.distance(0, 1), 2);
        assert_eq!(inst.distance(2, 1), 4);
        assert_eq!(inst.distance(2, 2), 0);
    }

    #[test]
    fn explicit_other_format_rejected() {
        let text = "NAME: m\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: UPPER_ROW\nEDGE_WEIGHT_SECTION\n2 3\n4\nEOF\n";
        match Instance::parse_tsplib(text) {
            Err(ParseError::UnsupportedMetric(m)) => assert!(m.contains("UPPER_ROW")),
            other => panic!("expected UnsupportedMetric, got {other:?}"),
        }
    }

    #[test]
    fn distance_symmetry_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for metric in [Metric::Euc2d, Metric::Ceil2d, Metric::Att] {
            let coords: Vec<(f64, f64)> = (0..60)
                .map(|_| (rng.random_range(0.0..1e4), rng.random_range(0.0..1e4)))
                .collect();
            let inst = Instance::from_coords("s", metric, coords);
            for _ in 0..10_000 {
                let i = rng.random_range(0..60);
                let j = rng.random_range(0..60);
                assert_eq!(inst.distance(i, j), inst.distance(j, i));
                if i != j {
                    assert!(inst.distance(i, j) >= 0);
                } else {
                    assert_eq!(inst.distance(i, j), 0);
                }
            }
        }
    }

    #[test]
    fn tour_write_format() {
        let inst = Instance::from_coords(
            "w",
            Metric::Euc2d,
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
        );
        let t = Tour::from_order(&inst, vec![0, 1, 2]);
        let text = inst.write_tour(&t).unwrap();
        let body: Vec<&str> = text
            .lines()
            .skip_while(|l| !l.starts_with("TOUR_SECTION"))
            .skip(1)
            .take_while(|l| *l != "EOF")
            .collect();
        assert_eq!(body, vec!["1", "2", "3", "-1"]);
    }

    #[test]
    fn tour_write_reversed() {
        let inst = Instance::from_coords(
            "w4",
            Metric::Euc2d,
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
        );
        let t = Tour::from_order(&inst, vec![0, 3, 2, 1]);
        let text = inst.write_tour(&t).unwrap();
        let body: Vec<&str> = text
            .lines()
            .skip_while(|l| !l.starts_with("TOUR_SECTION"))
            .skip(1)
            .take_while(|l| *l != "EOF")
            .collect();
        assert_eq!(body, vec!["1", "4", "3", "2", "-1"]);
    }

    #[test]
    fn tour_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coords: Vec<(f64, f64)> = (0..17)
            .map(|_| (rng.random_range(0.0..1e3), rng.random_range(0.0..1e3)))
            .collect();
        let inst = Instance::from_coords("rt", Metric::Euc2d, coords);
        let mut order: Vec<usize> = (0..17).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        let t = Tour::from_order(&inst, order);
        let text = inst.write_tour(&t).unwrap();
        let back = inst.parse_tour(&text).unwrap();
        // same cyclic sequence
        assert_eq!(back.order(), t.order());
        assert_eq!(back.length(), t.length());
    }

    #[test]
    fn bks_catalog_parse_and_attach() {
        let cat = parse_bks_catalog("# comment\nfoo 123\nbar 456\n").unwrap();
        assert_eq!(cat["foo"], 123);
        let mut inst =
            Instance::from_coords("bar", Metric::Euc2d, vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        inst.attach_bks(&cat);
        assert_eq!(inst.bks, Some(456));
    }
}
