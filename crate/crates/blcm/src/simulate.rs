//! Seeded scenario construction and dataset generation.
//!
//! The three latent structures (chain, collider, dependent) and the three
//! bipartite-graph variants (double-triangular, dense, sparse) with their
//! conditional parameters. Sampling is bit-reproducible given
//! (model, n, seed); the generator is ChaCha8 seeded per dataset.

use crate::configs;
use crate::graph::{BipartiteGraph, LatentDag};
use crate::model::{Blcm, ItemDistribution, ItemKind, LatentProportions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

/// Errors for dataset generation and ingestion.
#[derive(Debug, Error)]
pub enum SimulateError {
    /// Malformed input with its location.
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
    /// Structurally valid input violating the declared schema.
    #[error("schema error at row {row}, column {col}: {msg}")]
    Schema { row: usize, col: usize, msg: String },
    /// Malformed input without a location.
    #[error("parse error: {0}")]
    Malformed(String),
}

/// Latent-graph variants of the simulation study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaKind {
    Chain,
    Collider,
    Dependent,
}

/// Bipartite-graph variants: only `Dt` satisfies the identifiability
/// conditions; `Dense` breaks the subset condition, `Sparse` breaks the
/// three-children condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaKind {
    Dt,
    Dense,
    Sparse,
}

/// One simulation setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub lambda_kind: LambdaKind,
    pub gamma_kind: GammaKind,
    pub n: usize,
    pub seed: u64,
}

/// Column type of a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Binary,
    Real,
}

/// N records of mixed-type observations. Binary columns hold 0.0/1.0.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub columns: Vec<ColumnType>,
    pub rows: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn n_records(&self) -> usize {
        self.rows.len()
    }

    pub fn n_items(&self) -> usize {
        self.columns.len()
    }
}

/// The double-triangular bipartite graph of the running example.
pub fn gamma_dt() -> BipartiteGraph {
    BipartiteGraph::from_rows(vec![
        vec![1, 0, 0],
        vec![1, 1, 0],
        vec![1, 0, 1],
        vec![1, 1, 1],
        vec![1, 0, 1],
        vec![0, 1, 0],
        vec![0, 1, 1],
        vec![0, 0, 0],
    ])
    .expect("static graph")
}

/// The dense variant: items 2 and 6 gain the third latent as a parent,
/// nesting column 2's children inside column 3's.
pub fn gamma_dense() -> BipartiteGraph {
    BipartiteGraph::from_rows(vec![
        vec![1, 0, 0],
        vec![1, 1, 1],
        vec![1, 0, 1],
        vec![1, 1, 1],
        vec![1, 0, 1],
        vec![0, 1, 1],
        vec![0, 1, 1],
        vec![0, 0, 0],
    ])
    .expect("static graph")
}

/// The sparse variant: items 3 and 5 lose the third latent, leaving it with
/// only two observed children.
pub fn gamma_sparse() -> BipartiteGraph {
    BipartiteGraph::from_rows(vec![
        vec![1, 0, 0],
        vec![1, 1, 0],
        vec![1, 0, 0],
        vec![1, 1, 1],
        vec![1, 0, 0],
        vec![0, 1, 0],
        vec![0, 1, 1],
        vec![0, 0, 0],
    ])
    .expect("static graph")
}

fn gamma_of(kind: GammaKind) -> BipartiteGraph {
    match kind {
        GammaKind::Dt => gamma_dt(),
        GammaKind::Dense => gamma_dense(),
        GammaKind::Sparse => gamma_sparse(),
    }
}

fn lambda_of(kind: LambdaKind) -> LatentDag {
    let edges: &[(usize, usize)] = match kind {
        LambdaKind::Chain => &[(0, 1), (1, 2)],
        LambdaKind::Collider => &[(0, 1), (2, 1)],
        LambdaKind::Dependent => &[(0, 1), (0, 2), (1, 2)],
    };
    LatentDag::from_edges(3, edges).expect("static DAG")
}

/// Latent proportions for a latent-graph kind, over (H1,H2,H3) with the
/// shared configuration indexing.
pub fn proportions_of(kind: LambdaKind) -> LatentProportions {
    let n = configs::n_configs(3);
    let mut pi = vec![0.0f64; n];
    match kind {
        LambdaKind::Chain => {
            // P(H1=1) = 2/3, P(H2=H1 | H1) = 2/3, P(H3=H2 | H2) = 2/3
            for (h, slot) in pi.iter_mut().enumerate() {
                let h1 = configs::bit(h, 0);
                let h2 = configs::bit(h, 1);
                let h3 = configs::bit(h, 2);
                let p1 = if h1 { 2.0 } else { 1.0 };
                let p2 = if h2 == h1 { 2.0 } else { 1.0 };
                let p3 = if h3 == h2 { 2.0 } else { 1.0 };
                *slot = p1 * p2 * p3 / 27.0;
            }
        }
        LambdaKind::Collider => {
            // H1 ⊥ H3 with P(=1) = 2/3 each; H2 | (H1,H3) per the 0.2..0.8 table
            for (h, slot) in pi.iter_mut().enumerate() {
                let h1 = configs::bit(h, 0);
                let h2 = configs::bit(h, 1);
                let h3 = configs::bit(h, 2);
                let p1 = if h1 { 2.0 / 3.0 } else { 1.0 / 3.0 };
                let p3 = if h3 { 2.0 / 3.0 } else { 1.0 / 3.0 };
                let p2_one = match (h1, h3) {
                    (true, true) => 0.2,
                    (true, false) => 0.4,
                    (false, true) => 0.6,
                    (false, false) => 0.8,
                };
                let p2 = if h2 { p2_one } else { 1.0 - p2_one };
                *slot = p1 * p2 * p3;
            }
        }
        LambdaKind::Dependent => {
            // marginalize a hierarchical root H0 with P(H0=1) = 2/3 and
            // P(Ha = H0 | H0) = 2/3 for a = 1,2,3
            for (h, slot) in pi.iter_mut().enumerate() {
                let m = configs::weight(h);
                *slot = (f64::powi(2.0, m as i32 + 1) + f64::powi(2.0, 3 - m as i32)) / 81.0;
            }
        }
    }
    LatentProportions::from_weights(pi).expect("valid proportions")
}

/// Per-item parameter record in a scenario manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ItemManifest {
    pub kind: ItemKind,
    pub parents: Vec<usize>,
    pub mu: Vec<f64>,
    /// Present when the bipartite-graph variant changed this item.
    pub modified: Option<String>,
}

/// Auditable record of the exact model a scenario generates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub spec: ScenarioSpec,
    pub proportions: Vec<f64>,
    pub gamma: BipartiteGraph,
    pub lambda: LatentDag,
    pub items: Vec<ItemManifest>,
    pub rng: String,
}

/// Base conditional parameters: items 1–4 Bernoulli, 5–6 Normal(μ,1),
/// 7–8 Cauchy(μ,1).
fn base_items() -> Vec<(ItemKind, Vec<f64>)> {
    vec![
        (ItemKind::Bernoulli, vec![0.1, 0.9]),
        (ItemKind::Bernoulli, vec![0.05, 0.7, 0.4, 0.95]),
        (ItemKind::Bernoulli, vec![0.05, 0.4, 0.7, 0.95]),
        (
            ItemKind::Bernoulli,
            vec![0.985, 0.429, 0.714, 0.143, 0.857, 0.285, 0.571, 0.014],
        ),
        (ItemKind::Normal, vec![-2.0, 2.0, -0.5, 0.5]),
        (ItemKind::Normal, vec![-1.5, 1.5]),
        (ItemKind::Cauchy, vec![0.5, 2.0, -0.5, -2.0]),
        (ItemKind::Cauchy, vec![0.5]),
    ]
}

/// Split each old level into two by re-spacing all 2L new levels evenly over
/// the old range, preserving the order of the old levels. Keeps pairwise
/// gaps at (hi-lo)/(2L-1).
fn split_levels(old: &[f64]) -> Vec<f64> {
    let lo = old.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = old.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let n_new = 2 * old.len();
    let step = (hi - lo) / (n_new - 1) as f64;
    let mut order: Vec<usize> = (0..old.len()).collect();
    order.sort_by(|&a, &b| old[a].partial_cmp(&old[b]).unwrap());
    let mut rank = vec![0usize; old.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    // the added parent is the highest coordinate: old bits stay low
    let mut out = vec![0.0; n_new];
    for p in 0..old.len() {
        out[p] = lo + step * (2 * rank[p]) as f64;
        out[p + old.len()] = lo + step * (2 * rank[p] + 1) as f64;
    }
    out
}

/// Average over the removed coordinate of the old parent set.
fn collapse_levels(old: &[f64], removed_pos: usize, old_parents: usize) -> Vec<f64> {
    let n_new = configs::n_configs(old_parents - 1);
    let mut out = vec![0.0; n_new];
    for (m, slot) in out.iter_mut().enumerate() {
        let lo = configs::insert_bit(m, removed_pos, false);
        let hi = configs::insert_bit(m, removed_pos, true);
        *slot = 0.5 * (old[lo] + old[hi]);
    }
    out
}

/// Build the true model for a scenario, with the dense/sparse parameter
/// modifications applied.
pub fn build_scenario(spec: &ScenarioSpec) -> Blcm {
    build_scenario_with_manifest(spec).0
}

/// [`build_scenario`] plus the manifest documenting every parameter.
pub fn build_scenario_with_manifest(spec: &ScenarioSpec) -> (Blcm, ScenarioManifest) {
    let gamma = gamma_of(spec.gamma_kind);
    let lambda = lambda_of(spec.lambda_kind);
    let pi = proportions_of(spec.lambda_kind);
    let base = base_items();
    let base_gamma = gamma_dt();

    let mut items = Vec::with_capacity(base.len());
    let mut manifest_items = Vec::with_capacity(base.len());
    for (j, (kind, mu)) in base.iter().enumerate() {
        let old_parents = base_gamma.parents_of_item(j);
        let new_parents = gamma.parents_of_item(j);
        let (mu, note): (Vec<f64>, Option<String>) = if new_parents == old_parents {
            (mu.clone(), None)
        } else if new_parents.len() > old_parents.len() {
            (
                split_levels(mu),
                Some("edge added: levels re-spaced evenly over the old range".into()),
            )
        } else {
            let removed: Vec<usize> = old_parents
                .iter()
                .filter(|p| !new_parents.contains(p))
                .cloned()
                .collect();
            assert_eq!(removed.len(), 1);
            let pos = old_parents.iter().position(|&p| p == removed[0]).unwrap();
            (
                collapse_levels(mu, pos, old_parents.len()),
                Some("edge removed: levels averaged over the dropped parent".into()),
            )
        };
        manifest_items.push(ItemManifest {
            kind: *kind,
            parents: new_parents,
            mu: mu.clone(),
            modified: note,
        });
        items.push(ItemDistribution::new(*kind, mu).expect("valid scenario parameters"));
    }
    let model = Blcm::new(gamma.clone(), lambda.clone(), pi.clone(), items)
        .expect("scenario model is consistent");
    let manifest = ScenarioManifest {
        spec: *spec,
        proportions: pi.values().to_vec(),
        gamma,
        lambda,
        items: manifest_items,
        rng: "ChaCha8 seeded per dataset; records drawn sequentially".into(),
    };
    (model, manifest)
}

/// Column types implied by a model's item kinds.
pub fn schema_of(m: &Blcm) -> Vec<ColumnType> {
    m.items()
        .iter()
        .map(|i| match i.kind {
            ItemKind::Bernoulli => ColumnType::Binary,
            _ => ColumnType::Real,
        })
        .collect()
}

/// Draw `n` i.i.d. records: a latent configuration from π, then each item
/// from its conditional. Sequential per record; identical bytes per seed.
pub fn sample_dataset(m: &Blcm, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_conf = configs::n_configs(m.n_latents());
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut h = n_conf - 1;
        for c in 0..n_conf {
            acc += m.proportions().get(c);
            if u < acc {
                h = c;
                break;
            }
        }
        let mut row = Vec::with_capacity(m.n_items());
        for j in 0..m.n_items() {
            let mu = m.mu_at(j, h);
            let v = match m.items()[j].kind {
                ItemKind::Bernoulli => {
                    let u: f64 = rng.random();
                    if u < mu {
                        1.0
                    } else {
                        0.0
                    }
                }
                ItemKind::Normal => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    mu + z
                }
                ItemKind::Cauchy => {
                    // inverse CDF from one uniform
                    let u: f64 = rng.random();
                    mu + (std::f64::consts::PI * (u - 0.5)).tan()
                }
            };
            row.push(v);
        }
        rows.push(row);
    }
    Dataset {
        columns: schema_of(m),
        rows,
    }
}

/// Write a dataset as CSV: header `x1,...,xJ`, binary columns as 0/1
/// integers, real columns with 17 significant digits.
pub fn write_dataset<W: Write>(d: &Dataset, w: W) -> Result<(), SimulateError> {
    let mut wtr = csv::Writer::from_writer(w);
    let header: Vec<String> = (1..=d.n_items()).map(|j| format!("x{j}")).collect();
    wtr.write_record(&header)
        .map_err(|e| SimulateError::Malformed(e.to_string()))?;
    for row in &d.rows {
        let rec: Vec<String> = row
            .iter()
            .zip(&d.columns)
            .map(|(&v, &c)| match c {
                ColumnType::Binary => format!("{}", v as i64),
                ColumnType::Real => format!("{v:.16e}"),
            })
            .collect();
        wtr.write_record(&rec)
            .map_err(|e| SimulateError::Malformed(e.to_string()))?;
    }
    wtr.flush()
        .map_err(|e| SimulateError::Malformed(e.to_string()))?;
    Ok(())
}

/// Parse a dataset CSV against a declared schema. Binary columns must hold
/// 0/1; missing values are rejected (no missing-data model).
pub fn load_dataset<R: Read>(r: R, schema: &[ColumnType]) -> Result<Dataset, SimulateError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| SimulateError::Malformed(e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(SimulateError::Malformed("empty file".into()));
    }
    if headers.len() != schema.len() {
        return Err(SimulateError::Malformed(format!(
            "{} columns in file, schema declares {}",
            headers.len(),
            schema.len()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row_no = i + 2; // 1-based, after the header
        let rec = rec.map_err(|e| SimulateError::Parse {
            row: row_no,
            col: 0,
            msg: e.to_string(),
        })?;
        if rec.len() != schema.len() {
            return Err(SimulateError::Parse {
                row: row_no,
                col: 0,
                msg: format!("{} fields, expected {}", rec.len(), schema.len()),
            });
        }
        let mut row = Vec::with_capacity(schema.len());
        for (c, field) in rec.iter().enumerate() {
            let text = field.trim();
            if text.is_empty() || text.eq_ignore_ascii_case("na") {
                return Err(SimulateError::Parse {
                    row: row_no,
                    col: c + 1,
                    msg: "missing value".into(),
                });
            }
            let v: f64 = text.parse().map_err(|_| SimulateError::Parse {
                row: row_no,
                col: c + 1,
                msg: format!("'{text}' is not a number"),
            })?;
            if schema[c] == ColumnType::Binary && v != 0.0 && v != 1.0 {
                return Err(SimulateError::Schema {
                    row: row_no,
                    col: c + 1,
                    msg: format!("value {v} in a binary column"),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(Dataset {
        columns: schema.to_vec(),
        rows,
    })
}

/// Guess a schema by scanning values: a column seen only as 0/1 is binary.
pub fn infer_schema<R: Read>(r: R) -> Result<Vec<ColumnType>, SimulateError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| SimulateError::Malformed(e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(SimulateError::Malformed("empty file".into()));
    }
    let mut binary = vec![true; headers.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| SimulateError::Parse {
            row: i + 2,
            col: 0,
            msg: e.to_string(),
        })?;
        for (c, field) in rec.iter().enumerate() {
            if c >= binary.len() {
                break;
            }
            match field.trim().parse::<f64>() {
                Ok(v) if v == 0.0 || v == 1.0 => {}
                _ => binary[c] = false,
            }
        }
    }
    Ok(binary
        .into_iter()
        .map(|b| if b { ColumnType::Binary } else { ColumnType::Real })
        .collect())
}
