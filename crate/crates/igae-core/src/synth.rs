//! Synthetic data generation.
//!
//! Two generators: [`synth_dataset`] builds a small learnable image set
//! (subject-keyed color and stripe patterns plus seeded noise) for
//! desk-scale training runs, and [`stats_manifest`] builds a pixel-free
//! manifest whose post-filtering statistics reproduce the published
//! per-aspect identity, gender and age-group counts of the 11k hands
//! benchmark.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::data::{DataError, Gender, HandAspect, ManifestRecord};
use crate::image::{ImageU8, CHANNELS};
use crate::rng::{stream, RngExt};

/// Ages assigned to synthetic subjects, cycling through the six default
/// age groups so small datasets still exercise several classes.
const AGE_CYCLE: [u32; 6] = [18, 21, 22, 23, 24, 31];

const SYNTH_STREAM_TAG: u64 = 0x53594e54; // "SYNT"
const STATS_STREAM_TAG: u64 = 0x53544154; // "STAT"

/// Parameters of the trainable synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthSpec {
    pub n_subjects: usize,
    pub images_per_subject: usize,
    pub image_size: usize,
    pub seed: u64,
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [f64; 3] {
    let h6 = (h - h.floor()) * 6.0;
    let i = h6.floor() as usize % 6;
    let f = h6 - h6.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match i {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

/// Deterministic attributes of synthetic subject `idx`.
pub fn synth_subject_attrs(idx: usize) -> (Gender, u32) {
    let gender = if idx % 2 == 0 { Gender::Male } else { Gender::Female };
    (gender, AGE_CYCLE[idx % AGE_CYCLE.len()])
}

fn synth_image(spec: &SynthSpec, subject: usize, image: usize) -> ImageU8 {
    let side = spec.image_size;
    let mut rng = stream(
        spec.seed,
        &[SYNTH_STREAM_TAG, subject as u64, image as u64],
    );
    // subject identity cues: a hue plus an oriented stripe pattern
    let hue = subject as f64 / spec.n_subjects as f64;
    let base = hsv_to_rgb(hue, 0.7, 0.8);
    let freq = (2 + subject % 4) as f64;
    let vertical = subject % 2 == 0;
    let phase = rng.uniform() * core::f64::consts::TAU;
    let mut img = ImageU8::new(side, side);
    for y in 0..side {
        for x in 0..side {
            let along = if vertical { x } else { y } as f64 / side as f64;
            let wave = 0.5 + 0.5 * (core::f64::consts::TAU * freq * along + phase).sin();
            let shade = 0.7 + 0.3 * wave;
            for c in 0..CHANNELS {
                let noise = rng.uniform_in(-0.06, 0.06);
                let v = (base[c] * shade + noise).max(0.0).min(1.0);
                img.data[(y * side + x) * CHANNELS + c] = (v * 255.0 + 0.5) as u8;
            }
        }
    }
    img
}

/// Generate `n_subjects * images_per_subject` labeled images. Records and
/// images are parallel vectors in subject-major order; bit-identical for
/// equal specs.
pub fn synth_dataset(spec: &SynthSpec) -> Result<(Vec<ManifestRecord>, Vec<ImageU8>), DataError> {
    if spec.n_subjects < 2 {
        return Err(DataError::TooFewSubjects { n: spec.n_subjects });
    }
    let mut records = Vec::new();
    let mut images = Vec::new();
    for s in 0..spec.n_subjects {
        let (gender, age) = synth_subject_attrs(s);
        for i in 0..spec.images_per_subject {
            records.push(ManifestRecord {
                subject_id: format!("synth{s:03}"),
                age,
                gender,
                accessories: false,
                aspect: HandAspect::DorsalRight,
                image_path: format!("images/s{s:03}_i{i:03}.raw"),
            });
            images.push(synth_image(spec, s, i));
        }
    }
    Ok((records, images))
}

/// Published per-aspect statistics of a hand dataset: identity count,
/// image count, per-gender image counts and per-age-group image counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetStats {
    pub identities: usize,
    pub images: usize,
    pub male_images: usize,
    pub female_images: usize,
    pub age_group_images: [usize; 6],
}

/// The four aspect sub-datasets of the 11k hands benchmark after accessory
/// exclusion (dorsal right/left, palmar right/left).
pub const HANDS_11K: [(HandAspect, SubsetStats); 4] = [
    (
        HandAspect::DorsalRight,
        SubsetStats {
            identities: 143,
            images: 2004,
            male_images: 909,
            female_images: 1095,
            age_group_images: [372, 878, 414, 147, 114, 79],
        },
    ),
    (
        HandAspect::DorsalLeft,
        SubsetStats {
            identities: 146,
            images: 1869,
            male_images: 846,
            female_images: 1023,
            age_group_images: [328, 852, 362, 162, 87, 78],
        },
    ),
    (
        HandAspect::PalmarRight,
        SubsetStats {
            identities: 143,
            images: 1965,
            male_images: 948,
            female_images: 1017,
            age_group_images: [371, 861, 418, 148, 95, 72],
        },
    ),
    (
        HandAspect::PalmarLeft,
        SubsetStats {
            identities: 151,
            images: 2027,
            male_images: 949,
            female_images: 1078,
            age_group_images: [381, 890, 401, 180, 111, 64],
        },
    ),
];

/// Ages cycled through per age group, staying inside the valid span.
const GROUP_AGES: [&[u32]; 6] = [
    &[18, 19, 20],
    &[21],
    &[22],
    &[23],
    &[24, 25, 26, 27, 28, 29, 30],
    &[31, 35, 40, 50, 75],
];

/// One gender x age-group cell of the target contingency table.
struct Cell {
    gender: Gender,
    group: usize,
    images: usize,
    subjects: usize,
}

/// Split the gender marginal across age groups by the northwest-corner
/// rule, giving a joint image-count table consistent with both marginals.
fn joint_cells(stats: &SubsetStats) -> Vec<Cell> {
    let mut cells = Vec::new();
    let mut remaining = [stats.male_images, stats.female_images];
    for gender in Gender::ALL {
        for (group, &total) in stats.age_group_images.iter().enumerate() {
            let already: usize = cells
                .iter()
                .filter(|c: &&Cell| c.group == group)
                .map(|c| c.images)
                .sum();
            let take = remaining[gender.index()].min(total - already);
            if take > 0 {
                cells.push(Cell { gender, group, images: take, subjects: 0 });
                remaining[gender.index()] -= take;
            }
        }
    }
    debug_assert_eq!(remaining, [0, 0]);
    cells
}

/// Allocate the identity count across cells proportionally to cell image
/// counts (largest remainder), at least one subject per nonempty cell.
fn allocate_subjects(cells: &mut [Cell], identities: usize, images: usize) {
    let mut assigned = 0;
    let mut remainders: Vec<(usize, f64)> = Vec::new();
    for (i, cell) in cells.iter_mut().enumerate() {
        let quota = identities as f64 * cell.images as f64 / images as f64;
        let base = (quota.floor() as usize).max(1).min(cell.images);
        cell.subjects = base;
        assigned += base;
        remainders.push((i, quota - quota.floor()));
    }
    // hand out leftovers by descending remainder, ties to the earlier cell
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut left = identities.saturating_sub(assigned);
    for &(i, _) in remainders.iter().cycle().take(remainders.len() * 2) {
        if left == 0 {
            break;
        }
        if cells[i].subjects < cells[i].images {
            cells[i].subjects += 1;
            left -= 1;
        }
    }
    // over-allocation can only come from the at-least-one floor
    let mut over = assigned.saturating_sub(identities);
    while over > 0 {
        let i = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.subjects > 1)
            .max_by_key(|(_, c)| c.subjects)
            .map(|(i, _)| i)
            .expect("cannot satisfy identity count");
        cells[i].subjects -= 1;
        over -= 1;
    }
    debug_assert_eq!(cells.iter().map(|c| c.subjects).sum::<usize>(), identities);
}

fn aspect_prefix(aspect: HandAspect) -> &'static str {
    match aspect {
        HandAspect::DorsalRight => "dr",
        HandAspect::DorsalLeft => "dl",
        HandAspect::PalmarRight => "pr",
        HandAspect::PalmarLeft => "pl",
    }
}

/// Build a manifest for every aspect of [`HANDS_11K`]: after accessory
/// filtering and aspect partitioning, each bucket reproduces its published
/// statistics exactly. Accessory-flagged rows (including subjects that
/// appear only with accessories) are mixed in so the filtering stage has
/// real work to do; `seed` shuffles the row order.
pub fn stats_manifest(seed: u64) -> Vec<ManifestRecord> {
    let mut records = Vec::new();
    for (aspect, stats) in HANDS_11K {
        let prefix = aspect_prefix(aspect);
        let mut cells = joint_cells(&stats);
        allocate_subjects(&mut cells, stats.identities, stats.images);
        let mut subject_no = 0usize;
        for cell in &cells {
            let ages = GROUP_AGES[cell.group];
            let per = cell.images / cell.subjects;
            let extra = cell.images % cell.subjects;
            for s in 0..cell.subjects {
                let subject_id = format!("{prefix}{subject_no:04}");
                subject_no += 1;
                let age = ages[s % ages.len()];
                let n_images = per + usize::from(s < extra);
                for i in 0..n_images {
                    records.push(ManifestRecord {
                        subject_id: subject_id.clone(),
                        age,
                        gender: cell.gender,
                        accessories: false,
                        aspect,
                        image_path: format!("images/{prefix}/{subject_id}_{i:03}.raw"),
                    });
                }
                // a sprinkle of accessory shots that the filter must drop
                if s % 40 == 0 {
                    records.push(ManifestRecord {
                        subject_id: subject_id.clone(),
                        age,
                        gender: cell.gender,
                        accessories: true,
                        aspect,
                        image_path: format!("images/{prefix}/{subject_id}_acc.raw"),
                    });
                }
            }
        }
        // a subject visible only with accessories; filtering removes it entirely
        for i in 0..2 {
            records.push(ManifestRecord {
                subject_id: format!("{prefix}xacc"),
                age: 21,
                gender: Gender::Male,
                accessories: true,
                aspect,
                image_path: format!("images/{prefix}/{prefix}xacc_{i:03}.raw"),
            });
        }
    }
    let mut rng = stream(seed, &[STATS_STREAM_TAG]);
    rng.shuffle(&mut records);
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{
        bin_age, filter_accessories, partition_by_aspect, AgeGroupScheme, LabelMaps,
    };
    use std::collections::BTreeSet;

    #[test]
    fn synth_counts_match_the_spec() {
        let spec = SynthSpec { n_subjects: 6, images_per_subject: 10, image_size: 32, seed: 1 };
        let (records, images) = synth_dataset(&spec).unwrap();
        assert_eq!(records.len(), 60);
        assert_eq!(images.len(), 60);
        let subjects: BTreeSet<_> = records.iter().map(|r| r.subject_id.clone()).collect();
        assert_eq!(subjects.len(), 6);
    }

    #[test]
    fn synth_is_bit_deterministic() {
        let spec = SynthSpec { n_subjects: 3, images_per_subject: 2, image_size: 16, seed: 9 };
        let (ra, ia) = synth_dataset(&spec).unwrap();
        let (rb, ib) = synth_dataset(&spec).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(ia, ib);
    }

    #[test]
    fn synth_covers_both_genders_with_two_subjects() {
        let spec = SynthSpec { n_subjects: 2, images_per_subject: 4, image_size: 32, seed: 7 };
        let (records, _) = synth_dataset(&spec).unwrap();
        let genders: BTreeSet<_> = records.iter().map(|r| r.gender).collect();
        assert_eq!(genders.len(), 2);
    }

    #[test]
    fn synth_covers_enough_age_groups_with_six_subjects() {
        let spec = SynthSpec { n_subjects: 6, images_per_subject: 1, image_size: 16, seed: 0 };
        let (records, _) = synth_dataset(&spec).unwrap();
        let scheme = AgeGroupScheme::default();
        let groups: BTreeSet<_> = records
            .iter()
            .map(|r| bin_age(r.age, &scheme).unwrap())
            .collect();
        assert!(groups.len() >= 3);
    }

    #[test]
    fn synth_rejects_single_subject() {
        let spec = SynthSpec { n_subjects: 1, images_per_subject: 4, image_size: 16, seed: 0 };
        assert!(synth_dataset(&spec).is_err());
    }

    #[test]
    fn stats_manifest_reproduces_every_aspect() {
        let scheme = AgeGroupScheme::default();
        let records = stats_manifest(11);
        let kept = filter_accessories(records);
        let part = partition_by_aspect(kept);
        for (aspect, stats) in HANDS_11K {
            let bucket = part.get(aspect);
            assert_eq!(bucket.len(), stats.images, "{aspect:?} images");
            let maps = LabelMaps::build(bucket, scheme.clone()).unwrap();
            assert_eq!(maps.identity_count(), stats.identities, "{aspect:?} ids");
            let male = bucket.iter().filter(|r| r.gender == Gender::Male).count();
            assert_eq!(male, stats.male_images, "{aspect:?} male");
            assert_eq!(bucket.len() - male, stats.female_images, "{aspect:?} female");
            let mut groups = [0usize; 6];
            for r in bucket {
                groups[bin_age(r.age, &scheme).unwrap()] += 1;
            }
            assert_eq!(groups, stats.age_group_images, "{aspect:?} age groups");
        }
    }

    #[test]
    fn stats_manifest_contains_accessory_rows_to_filter() {
        let records = stats_manifest(0);
        assert!(records.iter().any(|r| r.accessories));
        // the accessory-only subjects vanish after filtering
        let kept = filter_accessories(records);
        assert!(!kept.iter().any(|r| r.subject_id.ends_with("xacc")));
    }
}
