//! Polarization measurements on an opinion vector and its network.
//!
//! Moments use the plain (biased) estimators and kurtosis is the excess
//! kurtosis, so a uniform distribution has a bimodality coefficient that
//! tends to 5/9 and a normal one tends to 1/3.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Bimodality coefficient of a uniform distribution.
pub const BC_CRITICAL: f64 = 5.0 / 9.0;

/// Default bins per axis for density maps.
pub const DEFAULT_BINS: usize = 64;

struct Moments {
    n: usize,
    m2: f64,
    m3: f64,
    m4: f64,
}

fn central_moments(samples: &[f64]) -> Result<Moments> {
    let n = samples.len();
    if n < 4 {
        return Err(Error::undefined(format!(
            "need at least 4 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let rough = samples.iter().sum::<f64>() / nf;
    let mean = rough + samples.iter().map(|x| x - rough).sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    let mut scale: f64 = 0.0;
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        scale = scale.max(x.abs());
    }
    m2 /= nf;
    // Spread at the level of rounding noise in the mean is zero variance.
    let noise = f64::EPSILON * scale.max(f64::MIN_POSITIVE) * 4.0;
    if !(m2 > noise * noise) {
        return Err(Error::undefined("samples have zero variance"));
    }
    Ok(Moments {
        n,
        m2,
        m3: m3 / nf,
        m4: m4 / nf,
    })
}

/// `m3 / m2^(3/2)`.
pub fn skewness(samples: &[f64]) -> Result<f64> {
    let m = central_moments(samples)?;
    Ok(m.m3 / m.m2.powf(1.5))
}

/// `m4 / m2² - 3`.
pub fn excess_kurtosis(samples: &[f64]) -> Result<f64> {
    let m = central_moments(samples)?;
    Ok(m.m4 / (m.m2 * m.m2) - 3.0)
}

/// `(g² + 1) / (k + 3(n-1)² / ((n-2)(n-3)))` with skewness `g` and excess
/// kurtosis `k`. Above [`BC_CRITICAL`] leans bimodal, below unimodal.
pub fn bimodality_coefficient(samples: &[f64]) -> Result<f64> {
    let m = central_moments(samples)?;
    let g = m.m3 / m.m2.powf(1.5);
    let k = m.m4 / (m.m2 * m.m2) - 3.0;
    let n = m.n as f64;
    Ok((g * g + 1.0) / (k + 3.0 * (n - 1.0).powi(2) / ((n - 2.0) * (n - 3.0))))
}

/// Ratio of the smaller to the larger of (#negative, #positive) samples.
/// Exact zeros belong to neither side.
pub fn balance(samples: &[f64]) -> Result<f64> {
    let negative = samples.iter().filter(|&&x| x < 0.0).count();
    let positive = samples.iter().filter(|&&x| x > 0.0).count();
    let (lo, hi) = (negative.min(positive), negative.max(positive));
    if hi == 0 {
        return Err(Error::undefined("balance needs a nonzero sample"));
    }
    Ok(lo as f64 / hi as f64)
}

/// Mean neighbor opinion per node, `None` for isolated nodes.
pub fn neighbor_average_opinions(graph: &Graph, opinions: &[f64]) -> Vec<Option<f64>> {
    assert_eq!(
        graph.node_count(),
        opinions.len(),
        "graph and opinions differ in size"
    );
    (0..graph.node_count())
        .map(|i| {
            let nbrs = graph.neighbors(i);
            (!nbrs.is_empty())
                .then(|| nbrs.iter().map(|&j| opinions[j]).sum::<f64>() / nbrs.len() as f64)
        })
        .collect()
}

/// `(b, b_NN)` pairs of every non-isolated node.
pub fn scored_pairs(graph: &Graph, opinions: &[f64]) -> (Vec<f64>, Vec<f64>) {
    neighbor_average_opinions(graph, opinions)
        .into_iter()
        .zip(opinions)
        .filter_map(|(nn, &b)| nn.map(|nn| (b, nn)))
        .unzip()
}

/// Square 2D histogram of `(b, b_NN)` over `[-1, 1]²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityMap {
    bins: usize,
    /// Row-major, `counts[row * bins + col]`; row indexes `b_NN`, column `b`.
    counts: Vec<u64>,
}

impl DensityMap {
    pub fn new(bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::param(format!(
                "density map needs >= 2 bins, got {bins}"
            )));
        }
        Ok(DensityMap {
            bins,
            counts: vec![0; bins * bins],
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    fn bin_of(&self, v: f64) -> usize {
        let scaled = ((v + 1.0) / 2.0 * self.bins as f64).floor();
        (scaled.max(0.0) as usize).min(self.bins - 1)
    }

    pub fn add(&mut self, b: f64, b_nn: f64) {
        let (col, row) = (self.bin_of(b), self.bin_of(b_nn));
        self.counts[row * self.bins + col] += 1;
    }

    /// Count in the cell at (`b` bin `col`, `b_NN` bin `row`).
    pub fn count(&self, col: usize, row: usize) -> u64 {
        self.counts[row * self.bins + col]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.bins)
    }

    /// Text grid: `# bins B`, `# range -1 1`, then one line per `b_NN` bin
    /// (lowest first) of space-separated counts over `b` bins.
    pub fn to_text(&self) -> String {
        let mut out = format!("# bins {}\n# range -1 1\n", self.bins);
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse {
            path: "density map".into(),
            line,
            message: msg.to_string(),
        };
        let mut lines = text.lines();
        let bins = lines
            .next()
            .and_then(|l| l.strip_prefix("# bins "))
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| bad(1, "expected '# bins <B>'"))?;
        if lines.next().map(str::trim) != Some("# range -1 1") {
            return Err(bad(2, "expected '# range -1 1'"));
        }
        let mut map = DensityMap::new(bins)?;
        let mut row = 0;
        for (offset, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let values: Vec<u64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(offset + 3, "non-integer count"))?;
            if values.len() != bins || row >= bins {
                return Err(bad(
                    offset + 3,
                    "row width or row count does not match bins",
                ));
            }
            map.counts[row * bins..(row + 1) * bins].copy_from_slice(&values);
            row += 1;
        }
        if row != bins {
            return Err(bad(bins + 2, "too few rows"));
        }
        Ok(map)
    }
}

/// Histogram of paired samples. Panics if the slices differ in length.
pub fn density_map(b: &[f64], b_nn: &[f64], bins: usize) -> Result<DensityMap> {
    assert_eq!(b.len(), b_nn.len(), "paired samples differ in length");
    let mut map = DensityMap::new(bins)?;
    for (&x, &y) in b.iter().zip(b_nn) {
        map.add(x, y);
    }
    Ok(map)
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Pearson correlation, `None` when either side has no spread.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "paired samples differ in length");
    if x.len() < 2 {
        return None;
    }
    let (mx, sx) = mean_std(x);
    let (my, sy) = mean_std(y);
    if sx <= 1e-12 || sy <= 1e-12 {
        return None;
    }
    let cov = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / x.len() as f64;
    Some((cov / (sx * sy)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Consensus,
    EchoChamber,
    Diverse,
    Mixed,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::Consensus => "consensus",
            Outcome::EchoChamber => "echo_chamber",
            Outcome::Diverse => "diverse",
            Outcome::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consensus" => Ok(Outcome::Consensus),
            "echo_chamber" => Ok(Outcome::EchoChamber),
            "diverse" => Ok(Outcome::Diverse),
            "mixed" => Ok(Outcome::Mixed),
            other => Err(Error::param(format!("unknown outcome '{other}'"))),
        }
    }
}

/// Thresholds of the outcome classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Minimum `corr(b, b_NN)` for an echo chamber.
    pub echo_correlation: f64,
    /// Minimum fraction of points in quadrants I and III for an echo chamber.
    pub echo_quadrant_mass: f64,
    /// Maximum standard deviation of `b` for consensus.
    pub consensus_spread: f64,
    /// Half-width of the band around 5/9 accepted as diverse.
    pub diverse_band: f64,
    /// Maximum `|corr(b, b_NN)|` for diverse.
    pub diverse_correlation: f64,
    /// Points within this distance of an axis count towards no quadrant.
    pub axis_margin: f64,
    pub min_nodes: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            echo_correlation: 0.6,
            echo_quadrant_mass: 0.8,
            consensus_spread: 0.35,
            diverse_band: 0.05,
            diverse_correlation: 0.3,
            axis_margin: 0.05,
            min_nodes: 10,
        }
    }
}

/// Fraction of points in quadrants I, II, III, IV (counter-clockwise from
/// `b > 0, b_NN > 0`). Points within `margin` of an axis are not counted,
/// so the four values sum to at most 1.
pub fn quadrant_mass(b: &[f64], b_nn: &[f64], margin: f64) -> [f64; 4] {
    assert_eq!(b.len(), b_nn.len(), "paired samples differ in length");
    let mut counts = [0usize; 4];
    for (&x, &y) in b.iter().zip(b_nn) {
        if x.abs() < margin || y.abs() < margin {
            continue;
        }
        let q = match (x > 0.0, y > 0.0) {
            (true, true) => 0,
            (false, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
        };
        counts[q] += 1;
    }
    let n = b.len().max(1) as f64;
    counts.map(|c| c as f64 / n)
}

/// Labels a final state from its `(b, b_NN)` pairs and bimodality
/// coefficient, with default thresholds.
pub fn classify_outcome(b: &[f64], b_nn: &[f64], bc: f64) -> Result<Outcome> {
    classify_with(b, b_nn, bc, &Thresholds::default())
}

/// Echo chamber: bimodal, strongly correlated with the neighborhood and
/// concentrated in quadrants I and III. Consensus: not bimodal and narrow.
/// Diverse: near-uniform and uncorrelated. Anything else is mixed.
pub fn classify_with(b: &[f64], b_nn: &[f64], bc: f64, t: &Thresholds) -> Result<Outcome> {
    if b.len() < t.min_nodes {
        return Err(Error::undefined(format!(
            "classifier needs >= {} scored nodes, got {}",
            t.min_nodes,
            b.len()
        )));
    }
    let (_, spread) = mean_std(b);
    let Some(corr) = pearson(b, b_nn) else {
        return if spread < t.consensus_spread {
            Ok(Outcome::Consensus)
        } else {
            Err(Error::undefined("neighbor averages have no spread"))
        };
    };
    let q = quadrant_mass(b, b_nn, t.axis_margin);
    if bc > BC_CRITICAL && corr > t.echo_correlation && q[0] + q[2] > t.echo_quadrant_mass {
        return Ok(Outcome::EchoChamber);
    }
    // An undefined coefficient only arises from a collapsed distribution.
    if (bc <= BC_CRITICAL || bc.is_nan()) && spread < t.consensus_spread {
        return Ok(Outcome::Consensus);
    }
    if (bc - BC_CRITICAL).abs() <= t.diverse_band && corr.abs() < t.diverse_correlation {
        return Ok(Outcome::Diverse);
    }
    Ok(Outcome::Mixed)
}

/// All polarization measurements of one opinion state.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// `NaN` when undefined.
    pub bc: f64,
    /// `NaN` when every opinion is exactly zero.
    pub beta: f64,
    /// `NaN` when undefined.
    pub corr_b_bnn: f64,
    pub quadrant_mass: [f64; 4],
    pub outcome: Option<Outcome>,
    /// Non-isolated nodes contributing `(b, b_NN)` pairs.
    pub sample_count: usize,
}

impl MetricsReport {
    pub fn compute(graph: &Graph, opinions: &[f64]) -> Self {
        let (b, b_nn) = scored_pairs(graph, opinions);
        let bc = bimodality_coefficient(opinions).unwrap_or(f64::NAN);
        let t = Thresholds::default();
        MetricsReport {
            bc,
            beta: balance(opinions).unwrap_or(f64::NAN),
            corr_b_bnn: pearson(&b, &b_nn).unwrap_or(f64::NAN),
            quadrant_mass: quadrant_mass(&b, &b_nn, t.axis_margin),
            outcome: classify_with(&b, &b_nn, bc, &t).ok(),
            sample_count: b.len(),
        }
    }
}
