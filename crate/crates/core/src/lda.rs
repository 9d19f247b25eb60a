//! Collapsed Gibbs sampling for LDA with the annealed update
//! `rho~(k; sigma) = (alpha + sigma l_d(k)) (beta + sigma m_k(v)) / (V beta + sigma m_k)`.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::math::ln_binomial;
use crate::seed::{derive_seed, rng_from_seed, ChainRng};
use crate::{Error, Result};

/// Documents as sequences of word ids `0..vocab`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<Vec<usize>>,
    vocab: usize,
}

impl Corpus {
    pub fn new(docs: Vec<Vec<usize>>, vocab: usize) -> Result<Self> {
        if let Some(&w) = docs.iter().flatten().find(|&&w| w >= vocab) {
            return Err(Error::InvalidParameter(format!("word id {w} outside 0..{vocab}")));
        }
        Ok(Self { docs, vocab })
    }

    /// One document per line of whitespace separated word ids starting at 1.
    pub fn parse_ids(text: &str) -> Result<Self> {
        let mut docs = Vec::new();
        let mut vocab = 0;
        for (i, line) in text.lines().enumerate() {
            let doc = line
                .split_whitespace()
                .map(|t| match t.parse::<usize>() {
                    Ok(id) if id >= 1 => {
                        vocab = vocab.max(id);
                        Ok(id - 1)
                    }
                    _ => Err(Error::Parse {
                        line: i + 1,
                        msg: format!("bad word id `{t}`"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            if !doc.is_empty() {
                docs.push(doc);
            }
        }
        Self::new(docs, vocab)
    }

    /// One document per line of raw tokens; `vocabulary` lists one token per line.
    pub fn parse_tokens(text: &str, vocabulary: &str) -> Result<(Self, Vec<String>)> {
        let words: Vec<String> = vocabulary
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        let index: HashMap<&str, usize> =
            words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
        let mut docs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let doc = line
                .split_whitespace()
                .map(|t| {
                    index.get(t).copied().ok_or_else(|| Error::Parse {
                        line: i + 1,
                        msg: format!("token `{t}` missing from the vocabulary"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if !doc.is_empty() {
                docs.push(doc);
            }
        }
        Ok((Self::new(docs, words.len())?, words))
    }

    pub fn from_file(path: impl AsRef<Path>, vocabulary: Option<&Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match vocabulary {
            Some(v) => Ok(Self::parse_tokens(&text, &std::fs::read_to_string(v)?)?.0),
            None => Self::parse_ids(&text),
        }
    }

    /// Three documents of `n/3` tokens: `9n/30` of word 0 and `n/30` of word 1,
    /// then all word 1, then all word 2.
    pub fn toy(n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(30) {
            return Err(Error::InvalidParameter(format!("toy corpus size {n} must be a positive multiple of 30")));
        }
        let m = n / 30;
        let mut doc0 = vec![0; 9 * m];
        doc0.extend(std::iter::repeat_n(1, m));
        Self::new(vec![doc0, vec![1; 10 * m], vec![2; 10 * m]], 3)
    }

    pub fn docs(&self) -> &[Vec<usize>] {
        &self.docs
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// `n_dj` as a `D x V` table.
    pub fn counts(&self) -> Vec<Vec<usize>> {
        let mut c = vec![vec![0; self.vocab]; self.docs.len()];
        for (d, doc) in self.docs.iter().enumerate() {
            for &w in doc {
                c[d][w] += 1;
            }
        }
        c
    }

    /// Token fractions `c_dj = n_dj / n`.
    pub fn fractions(&self) -> Vec<Vec<f64>> {
        let n = self.tokens() as f64;
        self.counts()
            .into_iter()
            .map(|r| r.into_iter().map(|c| c as f64 / n).collect())
            .collect()
    }
}

/// Raw text for [`build_corpus`]: chapters of tokens in one language.
#[derive(Debug, Clone)]
pub struct SourceText {
    pub chapters: Vec<Vec<String>>,
    pub stopwords: HashSet<String>,
    /// Target share of the corpus tokens.
    pub share: f64,
}

/// Corpus built from several sources, with one document per chapter.
#[derive(Debug, Clone)]
pub struct BuiltCorpus {
    pub corpus: Corpus,
    pub vocabulary: Vec<String>,
    /// Source index of each document.
    pub doc_source: Vec<usize>,
}

/// Takes the first words of every chapter, growing the prefix until each source
/// reaches `share * total_tokens` tokens among words occurring at least
/// `min_count` times in the kept text. Stopwords are dropped first
/// (case-insensitively).
pub fn build_corpus(sources: &[SourceText], total_tokens: usize, min_count: usize) -> Result<BuiltCorpus> {
    let share: f64 = sources.iter().map(|s| s.share).sum();
    if sources.is_empty() || (share - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("source shares must sum to 1".into()));
    }
    let mut vocab_index: HashMap<String, usize> = HashMap::new();
    let mut vocabulary = Vec::new();
    let mut docs = Vec::new();
    let mut doc_source = Vec::new();
    for (si, src) in sources.iter().enumerate() {
        let target = (src.share * total_tokens as f64).round() as usize;
        let chapters: Vec<Vec<String>> = src
            .chapters
            .iter()
            .map(|c| {
                c.iter()
                    .map(|t| t.to_lowercase())
                    .filter(|t| !src.stopwords.contains(t))
                    .collect()
            })
            .collect();
        let longest = chapters.iter().map(Vec::len).max().unwrap_or(0);
        let mut kept: Option<Vec<Vec<String>>> = None;
        for prefix in 1..=longest {
            let mut freq: HashMap<&str, usize> = HashMap::new();
            for c in &chapters {
                for t in c.iter().take(prefix) {
                    *freq.entry(t).or_default() += 1;
                }
            }
            let selection: Vec<Vec<String>> = chapters
                .iter()
                .map(|c| {
                    c.iter()
                        .take(prefix)
                        .filter(|t| freq[t.as_str()] >= min_count)
                        .cloned()
                        .collect()
                })
                .collect();
            let size: usize = selection.iter().map(Vec::len).sum();
            kept = Some(selection);
            if size >= target {
                break;
            }
        }
        let kept = kept.unwrap_or_default();
        let size: usize = kept.iter().map(Vec::len).sum();
        if size < target {
            return Err(Error::InvalidParameter(format!(
                "source {si} yields only {size} tokens, {target} requested"
            )));
        }
        for chapter in kept {
            let doc: Vec<usize> = chapter
                .into_iter()
                .map(|t| {
                    let next = vocabulary.len();
                    *vocab_index.entry(t.clone()).or_insert_with(|| {
                        vocabulary.push(t);
                        next
                    })
                })
                .collect();
            if !doc.is_empty() {
                docs.push(doc);
                doc_source.push(si);
            }
        }
    }
    Ok(BuiltCorpus {
        corpus: Corpus::new(docs, vocabulary.len())?,
        vocabulary,
        doc_source,
    })
}

/// Symmetric Dirichlet hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

/// Topic assignments with incrementally maintained counts.
#[derive(Debug, Clone)]
pub struct GibbsState {
    corpus: Arc<Corpus>,
    topics: usize,
    hyper: Hyper,
    z: Vec<Vec<usize>>,
    /// `l_d(k)`, flat `D x K`.
    doc_topic: Vec<u32>,
    /// `m_k(v)`, flat `K x V`.
    topic_word: Vec<u32>,
    /// `m_k`.
    topic_total: Vec<u32>,
    positions: Vec<(u32, u32)>,
    weights: Vec<f64>,
}

impl GibbsState {
    pub fn from_assignment(corpus: Arc<Corpus>, topics: usize, hyper: Hyper, z: Vec<Vec<usize>>) -> Result<Self> {
        if topics < 2 {
            return Err(Error::InvalidParameter("need at least two topics".into()));
        }
        if !(hyper.alpha > 0.0 && hyper.beta > 0.0) {
            return Err(Error::InvalidParameter("hyperparameters must be positive".into()));
        }
        if z.len() != corpus.docs().len()
            || z.iter().zip(corpus.docs()).any(|(a, b)| a.len() != b.len())
            || z.iter().flatten().any(|&k| k >= topics)
        {
            return Err(Error::InvalidParameter("assignment does not match the corpus".into()));
        }
        let positions = corpus
            .docs()
            .iter()
            .enumerate()
            .flat_map(|(d, doc)| (0..doc.len()).map(move |i| (d as u32, i as u32)))
            .collect();
        let mut state = Self {
            doc_topic: vec![0; corpus.docs().len() * topics],
            topic_word: vec![0; topics * corpus.vocab()],
            topic_total: vec![0; topics],
            corpus,
            topics,
            hyper,
            z,
            positions,
            weights: vec![0.0; topics],
        };
        let (dt, tw, tt) = state.recount();
        state.doc_topic = dt;
        state.topic_word = tw;
        state.topic_total = tt;
        Ok(state)
    }

    /// Every token gets an independent uniform topic.
    pub fn uniform(corpus: Arc<Corpus>, topics: usize, hyper: Hyper, rng: &mut ChainRng) -> Result<Self> {
        let z = corpus
            .docs()
            .iter()
            .map(|doc| doc.iter().map(|_| rng.gen_range(0..topics)).collect())
            .collect();
        Self::from_assignment(corpus, topics, hyper, z)
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn assignment(&self) -> &[Vec<usize>] {
        &self.z
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    fn recount(&self) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
        let (k, v) = (self.topics, self.corpus.vocab());
        let mut dt = vec![0; self.corpus.docs().len() * k];
        let mut tw = vec![0; k * v];
        let mut tt = vec![0; k];
        for (d, (doc, zs)) in self.corpus.docs().iter().zip(&self.z).enumerate() {
            for (&w, &t) in doc.iter().zip(zs) {
                dt[d * k + t] += 1;
                tw[t * v + w] += 1;
                tt[t] += 1;
            }
        }
        (dt, tw, tt)
    }

    /// Incremental tables agree with a recount from scratch.
    pub fn counts_coherent(&self) -> bool {
        let (dt, tw, tt) = self.recount();
        dt == self.doc_topic && tw == self.topic_word && tt == self.topic_total
    }

    fn shift(&mut self, d: usize, w: usize, t: usize, add: bool) {
        let (k, v) = (self.topics, self.corpus.vocab());
        let apply = |x: &mut u32| {
            if add {
                *x += 1
            } else {
                *x -= 1
            }
        };
        apply(&mut self.doc_topic[d * k + t]);
        apply(&mut self.topic_word[t * v + w]);
        apply(&mut self.topic_total[t]);
    }

    fn fill_weights(&mut self, d: usize, w: usize, sigma: f64) {
        let (k, v) = (self.topics, self.corpus.vocab());
        let Hyper { alpha, beta } = self.hyper;
        let vb = v as f64 * beta;
        for t in 0..k {
            let l = self.doc_topic[d * k + t] as f64;
            let m = self.topic_word[t * v + w] as f64;
            let mt = self.topic_total[t] as f64;
            self.weights[t] = (alpha + sigma * l) * (beta + sigma * m) / (vb + sigma * mt);
        }
    }

    /// `rho~(k; sigma)` at token `i` of document `d`, counts excluding that token.
    pub fn annealed_weights(&mut self, d: usize, i: usize, sigma: f64) -> Vec<f64> {
        let (w, t) = (self.corpus.docs()[d][i], self.z[d][i]);
        self.shift(d, w, t, false);
        self.fill_weights(d, w, sigma);
        self.shift(d, w, t, true);
        self.weights.clone()
    }

    /// `rho(k)` evaluated from a fresh count of the other tokens.
    pub fn standard_weights(&self, d: usize, i: usize) -> Vec<f64> {
        let docs = self.corpus.docs();
        let word = docs[d][i];
        let Hyper { alpha, beta } = self.hyper;
        let vocab = self.corpus.vocab() as f64;
        (0..self.topics)
            .map(|k| {
                let mut l = 0.0;
                let mut m_word = 0.0;
                let mut m = 0.0;
                for (dd, (doc, zs)) in docs.iter().zip(&self.z).enumerate() {
                    for (ii, (&w, &t)) in doc.iter().zip(zs).enumerate() {
                        if (dd, ii) == (d, i) || t != k {
                            continue;
                        }
                        m += 1.0;
                        if w == word {
                            m_word += 1.0;
                        }
                        if dd == d {
                            l += 1.0;
                        }
                    }
                }
                (alpha + l) * (beta + m_word) / (vocab * beta + m)
            })
            .collect()
    }

    /// Resamples the topic of token `i` in document `d` with weights `rho~(.; sigma)`.
    pub fn gibbs_update(&mut self, d: usize, i: usize, sigma: f64, rng: &mut ChainRng) -> usize {
        let (w, old) = (self.corpus.docs()[d][i], self.z[d][i]);
        self.shift(d, w, old, false);
        self.fill_weights(d, w, sigma);
        let total: f64 = self.weights.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        let mut new = self.topics - 1;
        for (t, &wt) in self.weights.iter().enumerate() {
            if u < wt {
                new = t;
                break;
            }
            u -= wt;
        }
        self.z[d][i] = new;
        self.shift(d, w, new, true);
        new
    }

    /// Updates one uniformly chosen token.
    pub fn step(&mut self, sigma: f64, rng: &mut ChainRng) {
        let (d, i) = self.positions[rng.gen_range(0..self.positions.len())];
        self.gibbs_update(d as usize, i as usize, sigma, rng);
    }

    pub fn run(&mut self, steps: u64, sigma: f64, rng: &mut ChainRng) {
        for _ in 0..steps {
            self.step(sigma, rng);
        }
    }

    /// `k_dj`: tokens of word `j` in document `d` assigned to topic 0.
    pub fn first_topic_counts(&self) -> Vec<Vec<usize>> {
        let mut k = vec![vec![0; self.corpus.vocab()]; self.corpus.docs().len()];
        for (d, (doc, zs)) in self.corpus.docs().iter().zip(&self.z).enumerate() {
            for (&w, &t) in doc.iter().zip(zs) {
                if t == 0 {
                    k[d][w] += 1;
                }
            }
        }
        k
    }

    fn require_two_unit(&self) -> Result<()> {
        if self.topics != 2 || self.hyper != Hyper::default() {
            return Err(Error::InvalidParameter(
                "closed form needs two topics and unit hyperparameters".into(),
            ));
        }
        Ok(())
    }

    /// Unnormalised `log mu(z)` for two topics with `alpha = beta = 1`:
    /// `log C(n + 2V - 2, k.. + V - 1) - sum_d log C(n_d., k_d.) - sum_j log C(n_.j, k_.j)`.
    pub fn log_posterior_k2(&self) -> Result<f64> {
        self.require_two_unit()?;
        Ok(closed_form_k2(&self.corpus.counts(), &self.first_topic_counts(), false))
    }

    /// The lumped `log nu(k)`, which adds `sum log C(n_dj, k_dj)`.
    pub fn log_lumped_k2(&self) -> Result<f64> {
        self.require_two_unit()?;
        Ok(closed_form_k2(&self.corpus.counts(), &self.first_topic_counts(), true))
    }

    /// Collapsed log joint `log p(z | w)` up to a constant, for any number of topics.
    pub fn log_joint(&self) -> f64 {
        let (k, v) = (self.topics, self.corpus.vocab());
        let Hyper { alpha, beta } = self.hyper;
        let mut out = 0.0;
        for (d, doc) in self.corpus.docs().iter().enumerate() {
            for t in 0..k {
                out += ln_gamma(alpha + self.doc_topic[d * k + t] as f64);
            }
            out -= ln_gamma(k as f64 * alpha + doc.len() as f64);
        }
        for t in 0..k {
            for w in 0..v {
                out += ln_gamma(beta + self.topic_word[t * v + w] as f64);
            }
            out -= ln_gamma(v as f64 * beta + self.topic_total[t] as f64);
        }
        out
    }

    /// `log mu` for two-topic unit-prior states, otherwise the collapsed log joint.
    pub fn log_posterior(&self) -> f64 {
        self.log_posterior_k2().unwrap_or_else(|_| self.log_joint())
    }
}

fn closed_form_k2(n: &[Vec<usize>], k: &[Vec<usize>], lumped: bool) -> f64 {
    let docs = n.len();
    let vocab = n.first().map_or(0, Vec::len);
    let total: usize = n.iter().flatten().sum();
    let k_total: usize = k.iter().flatten().sum();
    let mut out = ln_binomial((total + 2 * vocab - 2) as u64, (k_total + vocab - 1) as u64);
    for d in 0..docs {
        let nd: usize = n[d].iter().sum();
        let kd: usize = k[d].iter().sum();
        out -= ln_binomial(nd as u64, kd as u64);
    }
    for j in 0..vocab {
        let nj: usize = (0..docs).map(|d| n[d][j]).sum();
        let kj: usize = (0..docs).map(|d| k[d][j]).sum();
        out -= ln_binomial(nj as u64, kj as u64);
    }
    if lumped {
        for d in 0..docs {
            for j in 0..vocab {
                out += ln_binomial(n[d][j] as u64, k[d][j] as u64);
            }
        }
    }
    out
}

/// Exact kernel of the random-scan update on a tiny corpus, over all `K^n`
/// assignments (state index in base `K`, first token least significant).
pub fn enumerate_update_kernel(
    corpus: Arc<Corpus>,
    topics: usize,
    hyper: Hyper,
    sigma: f64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<Vec<usize>>>)> {
    let n = corpus.tokens();
    let states = topics
        .checked_pow(n as u32)
        .filter(|&s| s <= 1 << 14)
        .ok_or(Error::StateSpaceTooLarge {
            states: usize::MAX,
            cap: 1 << 14,
        })?;
    let lengths: Vec<usize> = corpus.docs().iter().map(Vec::len).collect();
    let decode = |mut s: usize| -> Vec<Vec<usize>> {
        lengths
            .iter()
            .map(|&len| {
                (0..len)
                    .map(|_| {
                        let t = s % topics;
                        s /= topics;
                        t
                    })
                    .collect()
            })
            .collect()
    };
    let assignments: Vec<_> = (0..states).map(decode).collect();
    let mut p = vec![vec![0.0; states]; states];
    for (s, z) in assignments.iter().enumerate() {
        let mut state = GibbsState::from_assignment(corpus.clone(), topics, hyper, z.clone())?;
        let mut flat = 0;
        let mut place = 1;
        for (d, &len) in lengths.iter().enumerate() {
            for i in 0..len {
                let w = state.annealed_weights(d, i, sigma);
                let total: f64 = w.iter().sum();
                let current = z[d][i];
                for (t, wt) in w.iter().enumerate() {
                    let target = s - current * place + t * place;
                    p[s][target] += wt / total / n as f64;
                }
                flat += 1;
                place *= topics;
            }
        }
        debug_assert_eq!(flat, n);
    }
    Ok((p, assignments))
}

/// A reference mode with its log posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRef {
    pub name: String,
    pub log_posterior: f64,
}

/// Index of the catalog entry closest in log posterior, if within `tolerance`.
pub fn classify_mode(log_posterior: f64, catalog: &[ModeRef], tolerance: f64) -> Option<usize> {
    catalog
        .iter()
        .enumerate()
        .map(|(i, m)| (i, (m.log_posterior - log_posterior).abs()))
        .filter(|&(_, gap)| gap <= tolerance)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

/// Half the smallest gap between catalog values.
pub fn default_tolerance(catalog: &[ModeRef]) -> f64 {
    let mut values: Vec<f64> = catalog.iter().map(|m| m.log_posterior).collect();
    values.sort_by(f64::total_cmp);
    0.5 * values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// The three local maxima of the toy corpus (topic 0 holds the listed tokens).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyMode {
    /// Document 0 and document 1 together; document 2 alone.
    Best,
    /// Word 0 with word 2; word 1 alone.
    Second,
    /// Word 0 alone; words 1 and 2 together.
    Worst,
}

impl ToyMode {
    pub const ALL: [ToyMode; 3] = [ToyMode::Best, ToyMode::Second, ToyMode::Worst];

    pub fn name(self) -> &'static str {
        match self {
            ToyMode::Best => "best",
            ToyMode::Second => "second",
            ToyMode::Worst => "worst",
        }
    }

    /// Assignment of the toy corpus realising this mode.
    pub fn assignment(self, corpus: &Corpus) -> Vec<Vec<usize>> {
        corpus
            .docs()
            .iter()
            .enumerate()
            .map(|(d, doc)| {
                doc.iter()
                    .map(|&w| {
                        let first = match self {
                            ToyMode::Best => d <= 1,
                            ToyMode::Second => w == 0 || w == 2,
                            ToyMode::Worst => w != 0,
                        };
                        usize::from(!first)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Catalog of the toy modes in [`ToyMode::ALL`] order.
pub fn toy_mode_catalog(corpus: Arc<Corpus>) -> Result<Vec<ModeRef>> {
    ToyMode::ALL
        .iter()
        .map(|&m| {
            let state = GibbsState::from_assignment(corpus.clone(), 2, Hyper::default(), m.assignment(&corpus))?;
            Ok(ModeRef {
                name: m.name().to_string(),
                log_posterior: state.log_posterior_k2()?,
            })
        })
        .collect()
}

/// Where each sweep run starts.
#[derive(Debug, Clone, PartialEq)]
pub enum StartState {
    Uniform,
    Given(Vec<Vec<usize>>),
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub kappas: Vec<f64>,
    pub runs: usize,
    pub stage1_steps: u64,
    pub stage2_steps: u64,
    pub topics: usize,
    pub hyper: Hyper,
    pub start: StartState,
    pub catalog: Vec<ModeRef>,
    pub tolerance: f64,
}

/// Endpoint of one run; `end_mode` is `None` when no catalog entry is close enough.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub kappa: f64,
    pub run: usize,
    pub end_mode: Option<usize>,
    pub log_posterior: f64,
}

/// For each `kappa`: `stage1_steps` token updates at `sigma = kappa / n`, then
/// `stage2_steps` at `sigma = 1`, then classification of the endpoint.
pub fn run_kappa_sweep(corpus: Arc<Corpus>, config: &SweepConfig, seed: u64) -> Result<Vec<SweepRecord>> {
    let n = corpus.tokens() as f64;
    let jobs: Vec<(usize, usize)> = (0..config.kappas.len())
        .flat_map(|ki| (0..config.runs).map(move |r| (ki, r)))
        .collect();
    jobs.par_iter()
        .map(|&(ki, run)| {
            let kappa = config.kappas[ki];
            let mut rng = rng_from_seed(derive_seed(seed, &[ki as u64, run as u64]));
            let mut state = match &config.start {
                StartState::Uniform => GibbsState::uniform(corpus.clone(), config.topics, config.hyper, &mut rng)?,
                StartState::Given(z) => {
                    GibbsState::from_assignment(corpus.clone(), config.topics, config.hyper, z.clone())?
                }
            };
            state.run(config.stage1_steps, kappa / n, &mut rng);
            state.run(config.stage2_steps, 1.0, &mut rng);
            let log_posterior = state.log_posterior();
            Ok(SweepRecord {
                kappa,
                run,
                end_mode: classify_mode(log_posterior, &config.catalog, config.tolerance),
                log_posterior,
            })
        })
        .collect()
}
