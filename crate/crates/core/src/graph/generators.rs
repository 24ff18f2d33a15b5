//! Seeded network generators.
//!
//! Bernoulli ensembles (ER, SBM) use geometric skipping over the pair index
//! so sparse graphs cost O(n + m). Degree-sequence models (RRG,
//! configuration model, LFR) use stub matching: a pairing that would create
//! a self-loop or multi-edge is swapped for another random open stub, and if
//! the tail of the matching gets stuck the whole matching restarts, up to
//! [`DEFAULT_RESTARTS`] times.

use rand::distributions::WeightedIndex;
use rand::prelude::*;

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::{seeded, SimRng};

/// Full restarts allowed before a stub-matching generator gives up.
pub const DEFAULT_RESTARTS: usize = 1000;

/// Random partner draws tried for one stub before the matching restarts.
const PARTNER_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct LfrParams {
    pub n: usize,
    /// Target fraction of each node's edges that leave its community.
    pub mu: f64,
    pub degree_exponent: f64,
    pub avg_degree: f64,
    pub k_max: usize,
    pub communities: usize,
}

impl Default for LfrParams {
    fn default() -> Self {
        LfrParams {
            n: 1000,
            mu: 0.1,
            degree_exponent: 2.2,
            avg_degree: 8.0,
            k_max: 40,
            communities: 2,
        }
    }
}

impl LfrParams {
    /// Community of every node: contiguous, equal-size blocks, the first
    /// `n % communities` blocks holding one extra node.
    pub fn membership(&self) -> Vec<usize> {
        block_membership(&equal_sizes(self.n, self.communities))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    ErdosRenyi {
        n: usize,
        avg_degree: f64,
    },
    StochasticBlock {
        sizes: Vec<usize>,
        p_in: f64,
        p_out: f64,
    },
    Lattice2d {
        side: usize,
    },
    RandomRegular {
        n: usize,
        k: usize,
    },
    PowerLawConfig {
        n: usize,
        gamma: f64,
        k_min: usize,
        k_max: usize,
    },
    Lfr(LfrParams),
}

/// A generator plus whether to keep only its largest connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub largest_component: bool,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind) -> Self {
        GeneratorSpec {
            kind,
            largest_component: false,
        }
    }

    pub fn er(n: usize, avg_degree: f64) -> Self {
        Self::new(GeneratorKind::ErdosRenyi { n, avg_degree })
    }

    pub fn with_largest_component(mut self) -> Self {
        self.largest_component = true;
        self
    }

    /// Short topology label used in result files.
    pub fn label(&self) -> &'static str {
        match self.kind {
            GeneratorKind::ErdosRenyi { .. } => "er",
            GeneratorKind::StochasticBlock { .. } => "sbm",
            GeneratorKind::Lattice2d { .. } => "lattice2d",
            GeneratorKind::RandomRegular { .. } => "rrg",
            GeneratorKind::PowerLawConfig { .. } => "powerlaw",
            GeneratorKind::Lfr(_) => "lfr",
        }
    }

    /// Label plus the degree parameter that tells apart generators of the
    /// same kind within one sweep, e.g. `er-k8` or `powerlaw-kmin2`.
    pub fn tag(&self) -> String {
        match &self.kind {
            GeneratorKind::ErdosRenyi { avg_degree, .. } => format!("er-k{avg_degree}"),
            GeneratorKind::RandomRegular { k, .. } => format!("rrg-k{k}"),
            GeneratorKind::PowerLawConfig { k_min, .. } => format!("powerlaw-kmin{k_min}"),
            GeneratorKind::Lfr(p) => format!("lfr-k{}", p.avg_degree),
            _ => self.label().to_string(),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Graph> {
        let g = match &self.kind {
            GeneratorKind::ErdosRenyi { n, avg_degree } => generate_er(*n, *avg_degree, seed)?,
            GeneratorKind::StochasticBlock { sizes, p_in, p_out } => {
                generate_sbm(sizes, *p_in, *p_out, seed)?
            }
            GeneratorKind::Lattice2d { side } => generate_lattice2d(*side)?,
            GeneratorKind::RandomRegular { n, k } => generate_rrg(*n, *k, seed)?,
            GeneratorKind::PowerLawConfig {
                n,
                gamma,
                k_min,
                k_max,
            } => generate_powerlaw_config(*n, *gamma, *k_min, *k_max, seed)?,
            GeneratorKind::Lfr(params) => generate_lfr(params, seed)?,
        };
        Ok(if self.largest_component {
            g.largest_connected_component()
        } else {
            g
        })
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("{name} = {p} is not a probability")))
    }
}

/// G(n, p) with `p = avg_degree / (n - 1)`.
pub fn generate_er(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::param(format!("ER needs n >= 2, got {n}")));
    }
    if !(avg_degree > 0.0 && avg_degree <= (n - 1) as f64) {
        return Err(Error::param(format!(
            "ER average degree {avg_degree} outside (0, {}]",
            n - 1
        )));
    }
    let p = avg_degree / (n - 1) as f64;
    let mut rng = seeded(seed);
    let mut g = Graph::empty(n);
    let nodes: Vec<usize> = (0..n).collect();
    bernoulli_within(&mut g, &nodes, p, &mut rng);
    Ok(g)
}

/// Stochastic block model: pairs in the same block connect with `p_in`,
/// pairs in different blocks with `p_out`. Blocks are contiguous id ranges.
pub fn generate_sbm(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    let n: usize = sizes.iter().sum();
    if n < 2 {
        return Err(Error::param(format!(
            "SBM block sizes sum to {n}, need >= 2"
        )));
    }
    check_probability("p_in", p_in)?;
    check_probability("p_out", p_out)?;
    let mut rng = seeded(seed);
    let mut g = Graph::empty(n);
    let blocks = block_ranges(sizes);
    for (i, block) in blocks.iter().enumerate() {
        bernoulli_within(&mut g, block, p_in, &mut rng);
        for other in &blocks[i + 1..] {
            bernoulli_between(&mut g, block, other, p_out, &mut rng);
        }
    }
    Ok(g)
}

/// Square lattice on a torus, von Neumann neighborhood.
pub fn generate_lattice2d(side: usize) -> Result<Graph> {
    if side < 3 {
        return Err(Error::param(format!(
            "lattice side {side} < 3 would wrap onto duplicate edges"
        )));
    }
    let id = |r: usize, c: usize| r * side + c;
    let mut g = Graph::empty(side * side);
    for r in 0..side {
        for c in 0..side {
            g.add_edge(id(r, c), id(r, (c + 1) % side));
            g.add_edge(id(r, c), id((r + 1) % side, c));
        }
    }
    Ok(g)
}

/// Uniformly stub-matched simple k-regular graph.
pub fn generate_rrg(n: usize, k: usize, seed: u64) -> Result<Graph> {
    if !(n * k).is_multiple_of(2) {
        return Err(Error::param(format!("n*k = {} is odd", n * k)));
    }
    if k >= n {
        return Err(Error::param(format!("degree {k} must be < n = {n}")));
    }
    let degrees = vec![k; n];
    let mut rng = seeded(seed);
    configuration_graph(&degrees, &mut rng)
        .ok_or_else(|| Error::Generation(format!("no simple {k}-regular graph on {n} nodes found")))
}

/// Configuration model with degrees drawn from `P(k) ∝ k^-gamma` on
/// `[k_min, k_max]`. If the degree sum is odd one random node's degree is
/// moved by one (up, unless it sits at `k_max`).
pub fn generate_powerlaw_config(
    n: usize,
    gamma: f64,
    k_min: usize,
    k_max: usize,
    seed: u64,
) -> Result<Graph> {
    if !(gamma > 1.0) {
        return Err(Error::param(format!(
            "power-law exponent {gamma} must be > 1"
        )));
    }
    if k_min == 0 || k_min > k_max {
        return Err(Error::param(format!(
            "need 1 <= k_min <= k_max, got [{k_min}, {k_max}]"
        )));
    }
    if k_max >= n {
        return Err(Error::param(format!("k_max {k_max} must be < n = {n}")));
    }
    let mut rng = seeded(seed);
    let support: Vec<usize> = (k_min..=k_max).collect();
    let weights = support.iter().map(|&k| (k as f64).powf(-gamma));
    let dist = WeightedIndex::new(weights).map_err(|e| Error::param(e.to_string()))?;
    let mut degrees: Vec<usize> = (0..n).map(|_| support[dist.sample(&mut rng)]).collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        let i = rng.gen_range(0..n);
        if degrees[i] < k_max {
            degrees[i] += 1;
        } else {
            degrees[i] -= 1;
        }
    }
    configuration_graph(&degrees, &mut rng).ok_or_else(|| {
        Error::Generation(format!(
            "power-law sequence (gamma {gamma}, [{k_min}, {k_max}]) not realisable as a simple graph"
        ))
    })
}

/// LFR-style benchmark with equal-size communities.
///
/// Degrees come from a continuous power law on `[x_min, k_max]` rounded to
/// integers, with `x_min` solved so the continuous mean equals
/// `avg_degree`. Each node sends `mu * k` of its stubs outside its community
/// (stochastically rounded); internal stubs are matched inside the
/// community, external stubs across communities.
pub fn generate_lfr(params: &LfrParams, seed: u64) -> Result<Graph> {
    let LfrParams {
        n,
        mu,
        degree_exponent,
        avg_degree,
        k_max,
        communities,
    } = *params;
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::param(format!("mixing mu = {mu} outside [0, 1]")));
    }
    if communities < 2 || n < 2 * communities {
        return Err(Error::param(format!(
            "LFR needs >= 2 communities of >= 2 nodes, got {communities} for n = {n}"
        )));
    }
    if !(degree_exponent > 1.0) {
        return Err(Error::param(format!(
            "degree exponent {degree_exponent} must be > 1"
        )));
    }
    if k_max >= n || !(avg_degree >= 1.0 && avg_degree < k_max as f64) {
        return Err(Error::param(format!(
            "need 1 <= avg_degree < k_max < n, got avg {avg_degree}, k_max {k_max}, n {n}"
        )));
    }
    let x_min = solve_power_law_min(degree_exponent, k_max as f64, avg_degree)
        .ok_or_else(|| Error::param(format!("no lower cutoff gives mean degree {avg_degree}")))?;

    let mut rng = seeded(seed);
    let membership = params.membership();
    let degrees: Vec<usize> = (0..n)
        .map(|_| {
            let x = sample_continuous_power_law(degree_exponent, x_min, k_max as f64, &mut rng);
            (x.round() as usize).clamp(1, k_max)
        })
        .collect();
    let mut external: Vec<usize> = degrees
        .iter()
        .map(|&k| {
            let target = mu * k as f64;
            let base = target.floor();
            base as usize + usize::from(rng.gen::<f64>() < target - base)
        })
        .collect();
    let mut internal: Vec<usize> = degrees.iter().zip(&external).map(|(k, e)| k - e).collect();

    let blocks: Vec<Vec<usize>> = (0..communities)
        .map(|c| (0..n).filter(|&i| membership[i] == c).collect())
        .collect();

    // Every community needs an even number of internal stubs; fix parity by
    // moving one node's internal degree, never by creating bridges.
    for block in &blocks {
        if block.iter().map(|&i| internal[i]).sum::<usize>() % 2 == 1 {
            let &i = block.choose(&mut rng).expect("blocks are nonempty");
            if internal[i] > 0
                && (internal[i] + 1 >= block.len() || internal[i] + external[i] >= k_max)
            {
                internal[i] -= 1;
            } else {
                internal[i] += 1;
            }
        }
    }
    // External stubs must be matchable across communities: with two
    // communities the sums must agree, otherwise none may exceed the rest
    // and the total must be even. Surplus stubs move inside in pairs so the
    // internal parity is kept.
    let external_sum =
        |external: &[usize], block: &[usize]| block.iter().map(|&i| external[i]).sum::<usize>();
    if communities > 2 && external.iter().sum::<usize>() % 2 == 1 {
        let with_external: Vec<usize> = (0..n).filter(|&i| external[i] > 0).collect();
        let &i = with_external
            .choose(&mut rng)
            .expect("odd external sum has a stub");
        external[i] -= 1;
    }
    loop {
        let sums: Vec<usize> = blocks.iter().map(|b| external_sum(&external, b)).collect();
        let total: usize = sums.iter().sum();
        let (largest, &max) = sums.iter().enumerate().max_by_key(|&(_, s)| *s).unwrap();
        let excess = if communities == 2 {
            max - total.saturating_sub(max)
        } else {
            (2 * max).saturating_sub(total)
        };
        if excess == 0 {
            break;
        }
        let moves = if excess == 1 { 1 } else { 2 };
        for _ in 0..moves {
            let with_external: Vec<usize> = blocks[largest]
                .iter()
                .copied()
                .filter(|&i| external[i] > 0)
                .collect();
            let &i = with_external
                .choose(&mut rng)
                .expect("largest external sum has a stub");
            external[i] -= 1;
            if moves == 2 {
                internal[i] += 1;
            }
        }
    }

    for _ in 0..DEFAULT_RESTARTS {
        let mut g = Graph::empty(n);
        let mut ok = true;
        for block in &blocks {
            let mut stubs: Vec<usize> = block
                .iter()
                .flat_map(|&i| std::iter::repeat_n(i, internal[i]))
                .collect();
            if !match_stubs(&mut stubs, &mut g, &mut rng, |_, _| true) {
                ok = false;
                break;
            }
        }
        if ok {
            let mut stubs: Vec<usize> = (0..n)
                .flat_map(|i| std::iter::repeat_n(i, external[i]))
                .collect();
            ok = match_stubs(&mut stubs, &mut g, &mut rng, |a, b| {
                membership[a] != membership[b]
            });
        }
        if ok {
            return Ok(g);
        }
    }
    Err(Error::Generation(format!(
        "LFR (n {n}, mu {mu}, k_max {k_max}) stub matching did not succeed"
    )))
}

fn equal_sizes(n: usize, parts: usize) -> Vec<usize> {
    (0..parts)
        .map(|c| n / parts + usize::from(c < n % parts))
        .collect()
}

fn block_ranges(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut start = 0;
    sizes
        .iter()
        .map(|&s| {
            let block = (start..start + s).collect();
            start += s;
            block
        })
        .collect()
}

fn block_membership(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
        .collect()
}

/// Number of failures before the next success of a Bernoulli(p) sequence.
fn geometric_skip(log_q: f64, rng: &mut SimRng) -> usize {
    let u: f64 = rng.gen();
    ((1.0 - u).ln() / log_q).floor() as usize
}

/// Connects each unordered pair of `nodes` independently with probability p.
fn bernoulli_within(g: &mut Graph, nodes: &[usize], p: f64, rng: &mut SimRng) {
    let m = nodes.len();
    if p <= 0.0 || m < 2 {
        return;
    }
    if p >= 1.0 {
        for v in 1..m {
            for w in 0..v {
                g.add_edge(nodes[v], nodes[w]);
            }
        }
        return;
    }
    // Batagelj–Brandes walk over the lower triangle.
    let log_q = (1.0 - p).ln();
    let mut v = 1usize;
    let mut w = 0usize;
    let mut first = true;
    while v < m {
        let skip = geometric_skip(log_q, rng);
        w = if first {
            skip
        } else {
            w.saturating_add(1).saturating_add(skip)
        };
        first = false;
        while w >= v && v < m {
            w -= v;
            v += 1;
        }
        if v < m {
            g.add_edge(nodes[v], nodes[w]);
        }
    }
}

/// Connects each pair in `a × b` independently with probability p.
fn bernoulli_between(g: &mut Graph, a: &[usize], b: &[usize], p: f64, rng: &mut SimRng) {
    let total = a.len() * b.len();
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        for &x in a {
            for &y in b {
                g.add_edge(x, y);
            }
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut t = geometric_skip(log_q, rng);
    while t < total {
        g.add_edge(a[t / b.len()], b[t % b.len()]);
        t = t
            .saturating_add(1)
            .saturating_add(geometric_skip(log_q, rng));
    }
}

/// Simple graph with exactly the given degree sequence, or `None` after
/// [`DEFAULT_RESTARTS`] failed matchings.
fn configuration_graph(degrees: &[usize], rng: &mut SimRng) -> Option<Graph> {
    let n = degrees.len();
    for _ in 0..DEFAULT_RESTARTS {
        let mut stubs: Vec<usize> = degrees
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
            .collect();
        let mut g = Graph::empty(n);
        if match_stubs(&mut stubs, &mut g, rng, |_, _| true) {
            return Some(g);
        }
    }
    None
}

/// Randomly pairs `stubs` into edges of `g`. A pairing is rejected when it
/// would be a self-loop, a duplicate, or fails `allowed`; the stub then
/// tries other random open partners. Returns `false` if a stub finds none.
fn match_stubs<F>(stubs: &mut [usize], g: &mut Graph, rng: &mut SimRng, allowed: F) -> bool
where
    F: Fn(usize, usize) -> bool,
{
    if stubs.len() % 2 == 1 {
        return false;
    }
    stubs.shuffle(rng);
    let valid = |g: &Graph, a: usize, b: usize| a != b && !g.has_edge(a, b) && allowed(a, b);
    let mut i = 0;
    while i < stubs.len() {
        let a = stubs[i];
        let mut partner = i + 1;
        if !valid(g, a, stubs[partner]) {
            let open = i + 1..stubs.len();
            let found = (0..PARTNER_ATTEMPTS)
                .map(|_| rng.gen_range(open.clone()))
                .find(|&j| valid(g, a, stubs[j]));
            match found {
                Some(j) => partner = j,
                None => return false,
            }
        }
        stubs.swap(i + 1, partner);
        g.add_edge(a, stubs[i + 1]);
        i += 2;
    }
    true
}

/// Mean of the continuous power law `x^-gamma` on `[a, b]`.
fn continuous_power_law_mean(gamma: f64, a: f64, b: f64) -> f64 {
    let (e1, e2) = (1.0 - gamma, 2.0 - gamma);
    let norm = if e1.abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(e1) - a.powf(e1)) / e1
    };
    let first = if e2.abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(e2) - a.powf(e2)) / e2
    };
    first / norm
}

/// Lower cutoff in `[1, b)` whose continuous power-law mean is `target`.
fn solve_power_law_min(gamma: f64, b: f64, target: f64) -> Option<f64> {
    let (mut lo, mut hi) = (1.0, b);
    if continuous_power_law_mean(gamma, lo, b) > target {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if continuous_power_law_mean(gamma, mid, b) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn sample_continuous_power_law(gamma: f64, a: f64, b: f64, rng: &mut SimRng) -> f64 {
    let e = 1.0 - gamma;
    let u: f64 = rng.gen();
    (a.powf(e) + u * (b.powf(e) - a.powf(e))).powf(1.0 / e)
}
