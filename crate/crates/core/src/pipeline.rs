//! Offline steps from raw trajectory files to a campaign pool, and their file formats.
//!
//! A work directory holds every artifact:
//!
//! ```text
//! manifest.json          ingested trajectories and rejections
//! trajectories/<id>.jsonl canonical copies of accepted trajectories
//! features/<id>.json     scalar features, phase events and keyframes
//! feature_stats.json     dataset statistics of the scalar features
//! distances.json         criterion and combined DTW matrices
//! clusters.json          k-medoids assignment
//! pool.json              sampled trajectory ids
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{
    dataset_feature_stats, extract_all, extract_feature_series, FeatureConfig, FeatureError,
    FeatureExport, FeatureVector,
};
use crate::similarity::{
    cluster_dataset, dataset_distance_matrices, sample_weights, stratified_sample_weighted,
    ClusterAssignment, CriterionWeights, SimilarityError,
};
use crate::trajectory::{
    filter_dataset, parse_trajectory_with_header, serialize_trajectory, Dataset, Trajectory,
    TrajectoryError,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRAJECTORY_DIR: &str = "trajectories";
pub const FEATURE_DIR: &str = "features";
pub const FEATURE_STATS_FILE: &str = "feature_stats.json";
pub const DISTANCES_FILE: &str = "distances.json";
pub const CLUSTERS_FILE: &str = "clusters.json";
pub const POOL_FILE: &str = "pool.json";

/// Longest episode kept by `ingest`, seconds.
pub const DEFAULT_MAX_DURATION_S: f64 = 8.0;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Trajectory {
        path: PathBuf,
        source: TrajectoryError,
    },
    #[error(transparent)]
    Dataset(#[from] TrajectoryError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error("{0}")]
    Invalid(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&bytes).map_err(|source| PipelineError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub steps: usize,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub file: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub max_duration_s: f64,
    pub trajectories: Vec<ManifestEntry>,
    /// Parsed but dropped by the duration or workspace filter.
    pub filtered: Vec<String>,
    pub rejected: Vec<Rejection>,
}

impl Manifest {
    pub fn ids(&self) -> Vec<String> {
        self.trajectories.iter().map(|t| t.id.clone()).collect()
    }
}

pub fn trajectory_path(work: &Path, id: &str) -> PathBuf {
    work.join(TRAJECTORY_DIR).join(format!("{id}.jsonl"))
}

pub fn load_trajectory(work: &Path, id: &str) -> Result<Trajectory, PipelineError> {
    let path = trajectory_path(work, id);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    parse_trajectory_with_header(&bytes)
        .map_err(|source| PipelineError::Trajectory { path, source })
}

fn load_manifest_trajectories(work: &Path) -> Result<(Manifest, Vec<Trajectory>), PipelineError> {
    let manifest: Manifest = read_json(&work.join(MANIFEST_FILE))?;
    let trajectories = manifest
        .trajectories
        .iter()
        .map(|t| load_trajectory(work, &t.id))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((manifest, trajectories))
}

/// Parses every `*.jsonl` file under `source`, filters the dataset and writes canonical copies.
pub fn ingest(source: &Path, work: &Path, max_duration_s: f64) -> Result<Manifest, PipelineError> {
    let mut files: Vec<PathBuf> = fs::read_dir(source)
        .map_err(io_err(source))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    let mut parsed = Vec::new();
    let mut rejected = Vec::new();
    for path in &files {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let result = fs::read(path)
            .map_err(|e| e.to_string())
            .and_then(|b| parse_trajectory_with_header(&b).map_err(|e| e.to_string()));
        match result {
            Ok(t) => parsed.push(t),
            Err(reason) => rejected.push(Rejection { file: name, reason }),
        }
    }
    let scene = parsed
        .first()
        .map(|t| Arc::clone(&t.scene))
        .ok_or_else(|| {
            PipelineError::Invalid(format!("no valid trajectory files in {}", source.display()))
        })?;
    let mut same_scene = Vec::new();
    for t in parsed {
        if *t.scene == *scene {
            same_scene.push(Trajectory {
                scene: Arc::clone(&scene),
                ..t
            });
        } else {
            rejected.push(Rejection {
                file: format!("{}.jsonl", t.id),
                reason: TrajectoryError::SceneMismatch(t.id.clone()).to_string(),
            });
        }
    }
    let all = Dataset::new(scene, same_scene)?;
    let kept = filter_dataset(&all, max_duration_s);
    let kept_ids: Vec<String> = kept.ids();
    let filtered = all
        .ids()
        .into_iter()
        .filter(|id| !kept_ids.contains(id))
        .collect();
    let dir = work.join(TRAJECTORY_DIR);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    for t in &kept.trajectories {
        let path = trajectory_path(work, &t.id);
        fs::write(&path, serialize_trajectory(t)).map_err(io_err(&path))?;
    }
    let manifest = Manifest {
        max_duration_s,
        trajectories: kept
            .trajectories
            .iter()
            .map(|t| ManifestEntry {
                id: t.id.clone(),
                steps: t.steps(),
                duration_s: t.duration_s(),
            })
            .collect(),
        filtered,
        rejected,
    };
    write_json(&work.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn feature_path(work: &Path, id: &str) -> PathBuf {
    work.join(FEATURE_DIR).join(format!("{id}.json"))
}

/// Extracts features of every ingested trajectory.
pub fn features(
    work: &Path,
    config: &FeatureConfig,
    include_series: bool,
) -> Result<usize, PipelineError> {
    let (_, trajectories) = load_manifest_trajectories(work)?;
    let mut vectors = Vec::with_capacity(trajectories.len());
    for t in &trajectories {
        let f = extract_all(t, config)?;
        vectors.push(f.vector);
        write_json(
            &feature_path(work, &t.id),
            &FeatureExport::new(&f, include_series),
        )?;
    }
    write_json(
        &work.join(FEATURE_STATS_FILE),
        &dataset_feature_stats(&vectors)?,
    )?;
    Ok(trajectories.len())
}

pub fn load_features(
    work: &Path,
    ids: &[String],
) -> Result<BTreeMap<String, FeatureExport>, PipelineError> {
    ids.iter()
        .map(|id| Ok((id.clone(), read_json(&feature_path(work, id))?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistancesFile {
    pub ids: Vec<String>,
    #[serde(rename = "D_safety")]
    pub d_safety: Vec<f64>,
    #[serde(rename = "D_efficiency")]
    pub d_efficiency: Vec<f64>,
    #[serde(rename = "D_task_quality")]
    pub d_task_quality: Vec<f64>,
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    pub weights: CriterionWeights,
}

/// Builds the DTW matrices and clusters the ingested trajectories.
pub fn cluster(
    work: &Path,
    k: usize,
    seed: u64,
    weights: CriterionWeights,
    config: &FeatureConfig,
) -> Result<ClusterAssignment, PipelineError> {
    let (manifest, trajectories) = load_manifest_trajectories(work)?;
    let ids = manifest.ids();
    let series: Vec<_> = trajectories
        .iter()
        .map(|t| extract_feature_series(t, config))
        .collect();
    let (m, _) = dataset_distance_matrices(&ids, &series, weights)?;
    write_json(
        &work.join(DISTANCES_FILE),
        &DistancesFile {
            ids,
            d_safety: m.safety.values.clone(),
            d_efficiency: m.efficiency.values.clone(),
            d_task_quality: m.task_quality.values.clone(),
            d: m.combined.values.clone(),
            weights,
        },
    )?;
    let clusters = cluster_dataset(&m.combined, k, seed)?;
    write_json(&work.join(CLUSTERS_FILE), &clusters)?;
    Ok(clusters)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolFile {
    pub m: usize,
    pub seed: u64,
    pub ids: Vec<String>,
}

/// Draws the labeling pool from the clustered dataset.
pub fn sample(work: &Path, m: usize, seed: u64) -> Result<PoolFile, PipelineError> {
    let manifest: Manifest = read_json(&work.join(MANIFEST_FILE))?;
    let clusters: ClusterAssignment = read_json(&work.join(CLUSTERS_FILE))?;
    let ids = manifest.ids();
    let features = load_features(work, &ids)?;
    let vectors: Vec<FeatureVector> = ids.iter().map(|id| features[id].scalars).collect();
    let weights = sample_weights(&ids, &vectors)?;
    let pool = PoolFile {
        m,
        seed,
        ids: stratified_sample_weighted(&ids, &weights, &clusters, m, seed)?,
    };
    write_json(&work.join(POOL_FILE), &pool)?;
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{SynthParams, TrajectorySynth};

    fn write_corpus(dir: &Path) {
        let mut synth = TrajectorySynth::new(21);
        for g in synth.generate_many(14, 40..=100) {
            fs::write(
                dir.join(format!("{}.jsonl", g.trajectory.id)),
                serialize_trajectory(&g.trajectory),
            )
            .unwrap();
        }
        let long = synth.generate(
            "too_long",
            &SynthParams {
                steps: 170,
                ..Default::default()
            },
        );
        fs::write(dir.join("too_long.jsonl"), serialize_trajectory(&long)).unwrap();
        fs::write(dir.join("broken.jsonl"), "{not json").unwrap();
        fs::write(dir.join("notes.txt"), "ignored").unwrap();
    }

    #[test]
    fn pipeline_runs_end_to_end() {
        let src = tempfile::tempdir().unwrap();
        let work = tempfile::tempdir().unwrap();
        write_corpus(src.path());

        let manifest = ingest(src.path(), work.path(), DEFAULT_MAX_DURATION_S).unwrap();
        assert_eq!(manifest.trajectories.len(), 14);
        assert_eq!(manifest.filtered, ["too_long"]);
        assert_eq!(manifest.rejected.len(), 1);
        assert_eq!(manifest.rejected[0].file, "broken.jsonl");

        assert_eq!(
            features(work.path(), &FeatureConfig::default(), false).unwrap(),
            14
        );
        let clusters = cluster(
            work.path(),
            3,
            7,
            CriterionWeights::default(),
            &FeatureConfig::default(),
        )
        .unwrap();
        assert_eq!(clusters.medoids.len(), 3);
        let d: DistancesFile = read_json(&work.path().join(DISTANCES_FILE)).unwrap();
        assert_eq!(d.d.len(), 14 * 14);

        let pool = sample(work.path(), 6, 3).unwrap();
        assert_eq!(pool.ids.len(), 6);
        assert_eq!(
            read_json::<PoolFile>(&work.path().join(POOL_FILE)).unwrap(),
            pool
        );
        let f = load_features(work.path(), &pool.ids).unwrap();
        assert_eq!(f.len(), 6);
    }

    #[test]
    fn ingest_of_empty_directory_fails() {
        let src = tempfile::tempdir().unwrap();
        let work = tempfile::tempdir().unwrap();
        assert!(matches!(
            ingest(src.path(), work.path(), DEFAULT_MAX_DURATION_S),
            Err(PipelineError::Invalid(_))
        ));
    }
}
