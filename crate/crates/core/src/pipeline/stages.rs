use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{construct_address, PipelineConfig, PipelineError, TimingClock};
use crate::augment::{Adjacency, AugmentedGraph};
use crate::gfn::{graph_input, pretrain_gfn, GfnModel, LabeledGraph};
use crate::ingest::{
    load_address_labels, parse_transactions, stratified_split, BehaviorClass, Split,
    TransactionStore,
};
use crate::linalg::Matrix;
use crate::metrics::{evaluate, timing_report};
use crate::seq::{classify_sequence, train_classifier, LabeledSequence, SeqModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    BuildGraphs,
    TrainGfn,
    Embed,
    TrainCls,
    Predict,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::BuildGraphs,
        Stage::TrainGfn,
        Stage::Embed,
        Stage::TrainCls,
        Stage::Predict,
        Stage::Evaluate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::BuildGraphs => "build-graphs",
            Stage::TrainGfn => "train-gfn",
            Stage::Embed => "embed",
            Stage::TrainCls => "train-cls",
            Stage::Predict => "predict",
            Stage::Evaluate => "evaluate",
        }
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

const INGEST: &str = "ingest.json";
const GRAPHS: &str = "graphs.jsonl";
const TIMING: &str = "timing_report.json";
const TIMING_WALL: &str = "timing_wall.json";
const GFN_MODEL: &str = "gfn.model";
const GFN_HISTORY: &str = "gfn_history.json";
const EMBEDDINGS: &str = "embeddings.jsonl";
const CLS_MODEL: &str = "cls.model";
const CLS_HISTORY: &str = "cls_history.json";
const PREDICTIONS: &str = "predictions.jsonl";
const METRICS: &str = "metrics.json";
const DIGESTS: &str = "digests.json";

/// Artifacts written by each stage, in stage order. Wall-clock timings are
/// informational and excluded from the digest file.
pub const ARTIFACTS: [(Stage, &[&str]); 7] = [
    (Stage::Ingest, &[INGEST]),
    (Stage::BuildGraphs, &[GRAPHS, TIMING]),
    (Stage::TrainGfn, &[GFN_MODEL, GFN_HISTORY]),
    (Stage::Embed, &[EMBEDDINGS]),
    (Stage::TrainCls, &[CLS_MODEL, CLS_HISTORY]),
    (Stage::Predict, &[PREDICTIONS]),
    (Stage::Evaluate, &[METRICS]),
];

#[derive(Debug, Serialize, Deserialize)]
struct IngestArtifact {
    transactions: usize,
    input_digests: BTreeMap<String, String>,
    split: Split,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphRecord {
    window_index: usize,
    edges: Vec<(usize, usize)>,
    features: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AddressGraphs {
    address: String,
    graphs: Vec<GraphRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingRecord {
    address: String,
    window_index: usize,
    vector: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Prediction {
    address: String,
    predicted: BehaviorClass,
    label: BehaviorClass,
    probabilities: Vec<f64>,
}

struct WorkDir<'a> {
    dir: &'a Path,
}

impl WorkDir<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn require(&self, name: &str, stage: Stage) -> Result<PathBuf, PipelineError> {
        let p = self.path(name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(PipelineError::Dependency {
                stage: stage.name(),
                artifact: p,
            })
        }
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let p = self.path(name);
        std::fs::write(&p, bytes).map_err(|source| PipelineError::Io { path: p, source })
    }

    fn read(&self, name: &str, stage: Stage) -> Result<Vec<u8>, PipelineError> {
        let p = self.require(name, stage)?;
        std::fs::read(&p).map_err(|source| PipelineError::Io { path: p, source })
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), PipelineError> {
        let mut text =
            serde_json::to_string_pretty(value).map_err(|e| PipelineError::Other(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn read_json<T: DeserializeOwned>(&self, name: &str, stage: Stage) -> Result<T, PipelineError> {
        let bytes = self.read(name, stage)?;
        serde_json::from_slice(&bytes).map_err(|e| corrupt(name, e))
    }

    fn write_lines<T: Serialize>(&self, name: &str, items: &[T]) -> Result<(), PipelineError> {
        let mut text = String::new();
        for item in items {
            text.push_str(
                &serde_json::to_string(item).map_err(|e| PipelineError::Other(e.to_string()))?,
            );
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    fn read_lines<T: DeserializeOwned>(
        &self,
        name: &str,
        stage: Stage,
    ) -> Result<Vec<T>, PipelineError> {
        let p = self.require(name, stage)?;
        let file = File::open(&p).map_err(|source| PipelineError::Io {
            path: p.clone(),
            source,
        })?;
        let mut out = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|source| PipelineError::Io {
                path: p.clone(),
                source,
            })?;
            if !line.trim().is_empty() {
                out.push(serde_json::from_str(&line).map_err(|e| corrupt(name, e))?);
            }
        }
        Ok(out)
    }

    fn record_digests(&self, names: &[&str]) -> Result<(), PipelineError> {
        let mut digests: BTreeMap<String, String> = match std::fs::read(self.path(DIGESTS)) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| corrupt(DIGESTS, e))?,
            Err(_) => BTreeMap::new(),
        };
        for name in names {
            let bytes = std::fs::read(self.path(name)).map_err(|source| PipelineError::Io {
                path: self.path(name),
                source,
            })?;
            digests.insert(name.to_string(), hex_digest(&bytes));
        }
        self.write_json(DIGESTS, &digests)
    }
}

fn corrupt(name: &str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Input(format!("corrupt artifact {name}: {e}"))
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn read_input(path: &Path) -> Result<Vec<u8>, PipelineError> {
    std::fs::read(path).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))
}

/// Runs one stage, reading upstream artifacts from and writing outputs to the
/// work directory.
pub fn run_stage(stage: Stage, cfg: &PipelineConfig) -> Result<(), PipelineError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.work_dir).map_err(|source| PipelineError::Io {
        path: cfg.work_dir.clone(),
        source,
    })?;
    let wd = WorkDir { dir: &cfg.work_dir };
    match stage {
        Stage::Ingest => ingest(cfg, &wd)?,
        Stage::BuildGraphs => build_graphs(cfg, &wd)?,
        Stage::TrainGfn => train_gfn(cfg, &wd)?,
        Stage::Embed => embed(cfg, &wd)?,
        Stage::TrainCls => train_cls(cfg, &wd)?,
        Stage::Predict => predict(&wd)?,
        Stage::Evaluate => evaluate_stage(&wd)?,
    }
    let names = ARTIFACTS
        .iter()
        .find(|(s, _)| *s == stage)
        .map(|(_, n)| *n)
        .unwrap_or(&[]);
    wd.record_digests(names)
}

pub fn run_all(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    for stage in Stage::ALL {
        run_stage(stage, cfg)?;
    }
    Ok(())
}

fn load_store(cfg: &PipelineConfig) -> Result<(TransactionStore, Vec<u8>), PipelineError> {
    let bytes = read_input(&cfg.transactions)?;
    let txs = parse_transactions(bytes.as_slice())?;
    Ok((TransactionStore::new(txs), bytes))
}

fn ingest(cfg: &PipelineConfig, wd: &WorkDir) -> Result<(), PipelineError> {
    let (store, tx_bytes) = load_store(cfg)?;
    let label_bytes = read_input(&cfg.labels)?;
    let labels = load_address_labels(label_bytes.as_slice())?;
    for address in labels.keys() {
        if store.collect_address_history(address).history.is_empty() {
            return Err(PipelineError::Input(format!(
                "labeled address {address} has no transactions"
            )));
        }
    }
    let split = stratified_split(&labels, cfg.train_fraction, cfg.seed)?;
    let input_digests = BTreeMap::from([
        ("labels".to_string(), hex_digest(&label_bytes)),
        ("transactions".to_string(), hex_digest(&tx_bytes)),
    ]);
    wd.write_json(
        INGEST,
        &IngestArtifact {
            transactions: store.len(),
            input_digests,
            split,
        },
    )
}

fn labeled_addresses(split: &Split) -> BTreeMap<&str, BehaviorClass> {
    split
        .train
        .iter()
        .chain(&split.test)
        .map(|(a, &c)| (a.as_str(), c))
        .collect()
}

fn build_graphs(cfg: &PipelineConfig, wd: &WorkDir) -> Result<(), PipelineError> {
    let art: IngestArtifact = wd.read_json(INGEST, Stage::Ingest)?;
    let (store, tx_bytes) = load_store(cfg)?;
    if art.input_digests.get("transactions") != Some(&hex_digest(&tx_bytes)) {
        return Err(PipelineError::Dependency {
            stage: Stage::Ingest.name(),
            artifact: wd.path(INGEST),
        });
    }
    let addresses: Vec<&str> = labeled_addresses(&art.split).into_keys().collect();
    let compression = cfg.compression();
    let pagerank = cfg.pagerank();
    let built = addresses
        .par_iter()
        .map(|&a| {
            construct_address(
                &store.collect_address_history(a),
                cfg.slice_unit,
                &compression,
                &pagerank,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let records: Vec<AddressGraphs> = addresses
        .iter()
        .zip(&built)
        .map(|(&address, c)| AddressGraphs {
            address: address.to_string(),
            graphs: c
                .graphs
                .iter()
                .map(|g| GraphRecord {
                    window_index: g.window_index,
                    edges: g.adjacency.edges(),
                    features: g.features.to_rows(),
                })
                .collect(),
        })
        .collect();
    wd.write_lines(GRAPHS, &records)?;

    let work: Vec<[f64; 4]> = built.iter().map(|c| c.work).collect();
    let wall: Vec<[f64; 4]> = built.iter().map(|c| c.wall).collect();
    let wall_report = timing_report(&wall, "seconds");
    match cfg.timing_clock {
        TimingClock::Work => {
            wd.write_json(TIMING, &timing_report(&work, "operations"))?;
            wd.write_json(TIMING_WALL, &wall_report)
        }
        TimingClock::Wall => wd.write_json(TIMING, &wall_report),
    }
}

fn load_graphs(wd: &WorkDir) -> Result<Vec<(String, Vec<AugmentedGraph>)>, PipelineError> {
    let records: Vec<AddressGraphs> = wd.read_lines(GRAPHS, Stage::BuildGraphs)?;
    records
        .into_iter()
        .map(|r| {
            let graphs = r
                .graphs
                .into_iter()
                .map(|g| {
                    let n = g.features.len();
                    if g.edges.iter().any(|&(a, b)| a >= n || b >= n) {
                        return Err(corrupt(
                            GRAPHS,
                            format!("edge out of range in {}", r.address),
                        ));
                    }
                    Ok(AugmentedGraph {
                        window_index: g.window_index,
                        adjacency: Adjacency::from_edges(n, &g.edges),
                        features: Matrix::from_rows(&g.features),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((r.address, graphs))
        })
        .collect()
}

fn inputs_for(graphs: &[AugmentedGraph], k: usize) -> Result<Vec<Matrix>, PipelineError> {
    graphs
        .iter()
        .map(|g| graph_input(&g.adjacency, &g.features, k).map_err(PipelineError::from))
        .collect()
}

fn train_gfn(cfg: &PipelineConfig, wd: &WorkDir) -> Result<(), PipelineError> {
    let art: IngestArtifact = wd.read_json(INGEST, Stage::Ingest)?;
    let graphs = load_graphs(wd)?;
    let mut data = Vec::new();
    for (address, gs) in &graphs {
        if let Some(class) = art.split.train.get(address) {
            for input in inputs_for(gs, cfg.gfn.k)? {
                data.push(LabeledGraph {
                    input,
                    label: class.index(),
                });
            }
        }
    }
    let (model, history) = pretrain_gfn(&data, &cfg.gfn, &cfg.gfn_training())?;
    wd.write(GFN_MODEL, &model.save())?;
    wd.write_json(GFN_HISTORY, &history)
}

fn embed(cfg: &PipelineConfig, wd: &WorkDir) -> Result<(), PipelineError> {
    let model = GfnModel::load(&wd.read(GFN_MODEL, Stage::TrainGfn)?)?;
    if model.config.k != cfg.gfn.k {
        return Err(PipelineError::Config(
            "gfn.k differs from the trained model".into(),
        ));
    }
    let graphs = load_graphs(wd)?;
    let per_address = graphs
        .par_iter()
        .map(|(address, gs)| {
            gs.iter()
                .map(|g| {
                    let xg = graph_input(&g.adjacency, &g.features, model.config.k)?;
                    let e = model.encode(&xg, g.window_index)?;
                    Ok(EmbeddingRecord {
                        address: address.clone(),
                        window_index: e.window_index,
                        vector: e.vector,
                    })
                })
                .collect::<Result<Vec<_>, PipelineError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let records: Vec<EmbeddingRecord> = per_address.into_iter().flatten().collect();
    wd.write_lines(EMBEDDINGS, &records)
}

fn load_sequences(wd: &WorkDir) -> Result<BTreeMap<String, Vec<Vec<f64>>>, PipelineError> {
    let records: Vec<EmbeddingRecord> = wd.read_lines(EMBEDDINGS, Stage::Embed)?;
    let mut by_address: BTreeMap<String, Vec<(usize, Vec<f64>)>> = BTreeMap::new();
    for r in records {
        by_address
            .entry(r.address)
            .or_default()
            .push((r.window_index, r.vector));
    }
    Ok(by_address
        .into_iter()
        .map(|(a, mut v)| {
            v.sort_by_key(|(w, _)| *w);
            (a, v.into_iter().map(|(_, e)| e).collect())
        })
        .collect())
}

fn train_cls(cfg: &PipelineConfig, wd: &WorkDir) -> Result<(), PipelineError> {
    let art: IngestArtifact = wd.read_json(INGEST, Stage::Ingest)?;
    let sequences = load_sequences(wd)?;
    let mut data = Vec::new();
    for (address, class) in &art.split.train {
        let embeddings = sequences
            .get(address)
            .ok_or_else(|| corrupt(EMBEDDINGS, format!("no embeddings for {address}")))?;
        data.push(LabeledSequence {
            embeddings: embeddings.clone(),
            label: class.index(),
        });
    }
    let (model, history) = train_classifier(&data, &cfg.classifier, &cfg.classifier_training())?;
    wd.write(CLS_MODEL, &model.save())?;
    wd.write_json(CLS_HISTORY, &history)
}

fn predict(wd: &WorkDir) -> Result<(), PipelineError> {
    let model = SeqModel::load(&wd.read(CLS_MODEL, Stage::TrainCls)?)?;
    let art: IngestArtifact = wd.read_json(INGEST, Stage::Ingest)?;
    let sequences = load_sequences(wd)?;
    let test: Vec<(&String, &BehaviorClass)> = art.split.test.iter().collect();
    let predictions = test
        .par_iter()
        .map(|&(address, &label)| {
            let seq = sequences
                .get(address)
                .ok_or_else(|| corrupt(EMBEDDINGS, format!("no embeddings for {address}")))?;
            let probabilities = classify_sequence(&model, seq)?;
            let best = argmax(&probabilities);
            let predicted = BehaviorClass::from_index(best).ok_or_else(|| {
                PipelineError::Other(format!("class index {best} has no behavior class"))
            })?;
            Ok(Prediction {
                address: address.clone(),
                predicted,
                label,
                probabilities,
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    wd.write_lines(PREDICTIONS, &predictions)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn evaluate_stage(wd: &WorkDir) -> Result<(), PipelineError> {
    let predictions: Vec<Prediction> = wd.read_lines(PREDICTIONS, Stage::Predict)?;
    let predicted: Vec<usize> = predictions.iter().map(|p| p.predicted.index()).collect();
    let truth: Vec<usize> = predictions.iter().map(|p| p.label.index()).collect();
    let names = BehaviorClass::ALL.map(BehaviorClass::name);
    let report = evaluate(&predicted, &truth, &names)?;
    wd.write_json(METRICS, &report)
}
