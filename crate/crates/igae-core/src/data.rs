//! Dataset preparation protocol: manifest records, accessory filtering,
//! hand-aspect partitioning, age-group binning, label encoding and the
//! per-subject stratified train/test split.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Float;

use crate::rng::{hash_bytes, stream, RngExt};

/// Valid subject age span of the modeled dataset.
pub const MIN_AGE: u32 = 18;
pub const MAX_AGE: u32 = 75;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DataError {
    #[error("age {age} outside the valid span [{MIN_AGE}, {MAX_AGE}]")]
    AgeOutOfRange { age: u32 },
    #[error("age {age} is not covered by any group of the binning scheme")]
    AgeNotCovered { age: u32 },
    #[error("invalid age-group scheme: {reason}")]
    InvalidScheme { reason: String },
    #[error("train fraction {fraction} must lie strictly between 0 and 1")]
    InvalidFraction { fraction: f64 },
    #[error("subject {subject} is not in the identity label map")]
    UnknownSubject { subject: String },
    #[error("synthetic dataset needs at least 2 subjects, got {n}")]
    TooFewSubjects { n: usize },
}

/// Subject gender; encoded as class indices 0 (male) / 1 (female).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Male, Gender::Female];

    pub fn index(self) -> usize {
        match self {
            Gender::Male => 0,
            Gender::Female => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }
}

/// Which hand surface/side an image shows. The dataset is partitioned into
/// one sub-dataset per aspect before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HandAspect {
    DorsalRight,
    DorsalLeft,
    PalmarRight,
    PalmarLeft,
}

impl HandAspect {
    pub const ALL: [HandAspect; 4] = [
        HandAspect::DorsalRight,
        HandAspect::DorsalLeft,
        HandAspect::PalmarRight,
        HandAspect::PalmarLeft,
    ];

    pub fn index(self) -> usize {
        match self {
            HandAspect::DorsalRight => 0,
            HandAspect::DorsalLeft => 1,
            HandAspect::PalmarRight => 2,
            HandAspect::PalmarLeft => 3,
        }
    }

    /// Canonical token used in manifest files and CLI flags.
    pub fn token(self) -> &'static str {
        match self {
            HandAspect::DorsalRight => "dorsal_right",
            HandAspect::DorsalLeft => "dorsal_left",
            HandAspect::PalmarRight => "palmar_right",
            HandAspect::PalmarLeft => "palmar_left",
        }
    }
}

/// One labeled hand image row of a dataset manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub subject_id: String,
    pub age: u32,
    pub gender: Gender,
    pub accessories: bool,
    pub aspect: HandAspect,
    pub image_path: String,
}

/// One age group: a half-open integer range `[lo, hi)` with a display label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgeGroup {
    pub label: String,
    pub lo: u32,
    /// Exclusive upper bound.
    pub hi: u32,
}

/// Ordered, disjoint age groups covering the valid age span. The default
/// scheme has the six groups the age statistics are reported over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgeGroupScheme {
    pub min_age: u32,
    pub max_age: u32,
    pub groups: Vec<AgeGroup>,
}

impl Default for AgeGroupScheme {
    fn default() -> Self {
        let g = |label: &str, lo: u32, hi: u32| AgeGroup {
            label: label.to_string(),
            lo,
            hi,
        };
        AgeGroupScheme {
            min_age: MIN_AGE,
            max_age: MAX_AGE,
            groups: alloc::vec![
                g("0-20", 0, 21),
                g("21", 21, 22),
                g("22", 22, 23),
                g("23", 23, 24),
                g("24-30", 24, 31),
                g("31-75", 31, 76),
            ],
        }
    }
}

impl AgeGroupScheme {
    /// Groups must be nonempty, ordered, disjoint and jointly cover the
    /// valid span `[min_age, max_age]`.
    pub fn validate(&self) -> Result<(), DataError> {
        let err = |reason: &str| DataError::InvalidScheme {
            reason: reason.to_string(),
        };
        if self.groups.is_empty() {
            return Err(err("no groups"));
        }
        if self.min_age > self.max_age {
            return Err(err("min_age exceeds max_age"));
        }
        for pair in self.groups.windows(2) {
            if pair[0].hi != pair[1].lo {
                return Err(err("groups must be ordered and contiguous"));
            }
        }
        for g in &self.groups {
            if g.lo >= g.hi {
                return Err(err("empty group range"));
            }
        }
        let lo = self.groups[0].lo;
        let hi = self.groups[self.groups.len() - 1].hi;
        if lo > self.min_age || hi <= self.max_age {
            return Err(err("groups do not cover the valid age span"));
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<String> {
        self.groups.iter().map(|g| g.label.clone()).collect()
    }
}

/// The group index whose range contains `age`.
pub fn bin_age(age: u32, scheme: &AgeGroupScheme) -> Result<usize, DataError> {
    if age < scheme.min_age || age > scheme.max_age {
        return Err(DataError::AgeOutOfRange { age });
    }
    scheme
        .groups
        .iter()
        .position(|g| g.lo <= age && age < g.hi)
        .ok_or(DataError::AgeNotCovered { age })
}

/// Drop every record flagged as wearing accessories, preserving order.
pub fn filter_accessories(records: Vec<ManifestRecord>) -> Vec<ManifestRecord> {
    records.into_iter().filter(|r| !r.accessories).collect()
}

/// Records split into the four aspect sub-datasets, input order preserved
/// within each bucket.
#[derive(Debug, Clone, Default)]
pub struct AspectPartition {
    buckets: [Vec<ManifestRecord>; 4],
}

impl AspectPartition {
    pub fn get(&self, aspect: HandAspect) -> &[ManifestRecord] {
        &self.buckets[aspect.index()]
    }

    pub fn take(mut self, aspect: HandAspect) -> Vec<ManifestRecord> {
        core::mem::take(&mut self.buckets[aspect.index()])
    }

    pub fn total_len(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }
}

pub fn partition_by_aspect(records: Vec<ManifestRecord>) -> AspectPartition {
    let mut part = AspectPartition::default();
    for r in records {
        part.buckets[r.aspect.index()].push(r);
    }
    part
}

/// Bijective encodings from record attributes to per-head class indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMaps {
    /// Identity index -> subject id, sorted; built only from subjects that
    /// still have records after filtering and partitioning.
    pub subjects: Vec<String>,
    pub scheme: AgeGroupScheme,
}

impl LabelMaps {
    pub fn build(records: &[ManifestRecord], scheme: AgeGroupScheme) -> Result<Self, DataError> {
        scheme.validate()?;
        let mut subjects: Vec<String> = records.iter().map(|r| r.subject_id.clone()).collect();
        subjects.sort_unstable();
        subjects.dedup();
        Ok(LabelMaps { subjects, scheme })
    }

    pub fn identity_index(&self, subject_id: &str) -> Result<usize, DataError> {
        self.subjects
            .binary_search_by(|s| s.as_str().cmp(subject_id))
            .map_err(|_| DataError::UnknownSubject {
                subject: subject_id.to_string(),
            })
    }

    /// `(identity, gender, age-group)` class indices for one record.
    pub fn encode(&self, record: &ManifestRecord) -> Result<(usize, usize, usize), DataError> {
        Ok((
            self.identity_index(&record.subject_id)?,
            record.gender.index(),
            bin_age(record.age, &self.scheme)?,
        ))
    }

    pub fn identity_count(&self) -> usize {
        self.subjects.len()
    }

    pub fn age_group_count(&self) -> usize {
        self.scheme.groups.len()
    }

    pub fn gender_labels(&self) -> Vec<String> {
        Gender::ALL.iter().map(|g| g.label().to_string()).collect()
    }
}

/// Seeded per-subject split parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub seed: u64,
    pub train_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            seed: 0,
            train_fraction: 0.5,
        }
    }
}

const SPLIT_STREAM_TAG: u64 = 0x53504c49; // "SPLI"

/// Split records into train/test per subject: each subject's rows are
/// shuffled by a stream keyed on `(seed, subject)` and the first
/// `ceil(n * fraction)` go to train. Output keeps the original manifest
/// order within each side.
pub fn stratified_split(
    records: Vec<ManifestRecord>,
    spec: &SplitSpec,
) -> Result<(Vec<ManifestRecord>, Vec<ManifestRecord>), DataError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(DataError::InvalidFraction {
            fraction: spec.train_fraction,
        });
    }
    let mut by_subject: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_subject.entry(r.subject_id.as_str()).or_default().push(i);
    }
    let mut in_train = alloc::vec![false; records.len()];
    for (subject, mut idxs) in by_subject {
        let mut rng = stream(spec.seed, &[SPLIT_STREAM_TAG, hash_bytes(subject.as_bytes())]);
        rng.shuffle(&mut idxs);
        let n_train = (idxs.len() as f64 * spec.train_fraction).ceil() as usize;
        for &i in idxs.iter().take(n_train) {
            in_train[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, r) in records.into_iter().enumerate() {
        if in_train[i] {
            train.push(r);
        } else {
            test.push(r);
        }
    }
    Ok((train, test))
}
