//! Data pipeline checks that cross module boundaries: the loader/batcher
//! pairing invariant and the augmentation property sweep.

use hcrn_core::data::{
    augment, batches, load_dataset, ppm, resize_dataset, to_grayscale, AugmentSpec, ClassMap,
    LabeledImage, Split, CLASS_NAMES,
};
use hcrn_core::rng::Rng;
use hcrn_core::tensor::Tensor;
use std::path::{Path, PathBuf};

fn write_ppm(path: &Path, seed: u64, h: usize, w: usize) {
    let mut rng = Rng::new(seed);
    let img = Tensor::new(&[h, w, 3], (0..h * w * 3).map(|_| rng.next_f64()).collect()).unwrap();
    std::fs::write(path, ppm::encode(&img).unwrap()).unwrap();
}

fn scratch_dataset(tag: &str, per_class: usize, h: usize, w: usize) -> PathBuf {
    let root = std::env::temp_dir().join(format!("hcrn-datapipe-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&root);
    let mut seed = 1;
    for class in CLASS_NAMES {
        let dir = root.join("TRAIN").join(class);
        std::fs::create_dir_all(&dir).unwrap();
        for i in 0..per_class {
            write_ppm(&dir.join(format!("img{i:03}.ppm")), seed, h, w);
            seed += 1;
        }
    }
    root
}

#[test]
fn gray_channel_is_recomputable_from_every_emitted_batch() {
    let root = scratch_dataset("pairing", 3, 10, 12);
    let items = load_dataset(&root, Split::Train).unwrap();
    let items = resize_dataset(items, 8, 10).unwrap();
    let map = ClassMap::four_way();
    let spec = AugmentSpec {
        seed: 5,
        ..AugmentSpec::default()
    };
    for batch in batches(&items, &map, 5, Some(3), 2, Some(spec)).unwrap() {
        let batch = batch.unwrap();
        for b in 0..batch.len() {
            let rgb = batch.rgb.index_axis0(b).unwrap();
            let gray = batch.gray.index_axis0(b).unwrap();
            assert_eq!(to_grayscale(&rgb).unwrap(), gray);
        }
    }
    std::fs::remove_dir_all(&root).unwrap();
}

#[test]
fn augmentation_sweep_preserves_shape_label_and_range() {
    // 1000 random specs against a fixed image
    let mut value_rng = Rng::new(9);
    let pixels = Tensor::new(
        &[9, 11, 3],
        (0..297).map(|_| value_rng.next_f64()).collect(),
    )
    .unwrap();
    let img = LabeledImage {
        pixels,
        label: "EOSINOPHIL".into(),
        path: PathBuf::from("sweep"),
    };
    let mut spec_rng = Rng::new(10);
    for i in 0..1000u64 {
        let spec = AugmentSpec {
            rotation_degrees: spec_rng.uniform(0.0, 45.0),
            reflect_prob: spec_rng.next_f64(),
            shift_frac: spec_rng.uniform(0.0, 0.4),
            seed: i,
        };
        let out = augment(&img, &spec, &mut Rng::new(i)).unwrap();
        assert_eq!(out.pixels.shape(), img.pixels.shape());
        assert_eq!(out.label, img.label);
        assert!(out.pixels.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}

#[test]
fn loader_and_batcher_are_deterministic_end_to_end() {
    let root = scratch_dataset("determinism", 2, 7, 7);
    let run = || {
        let items = load_dataset(&root, Split::Train).unwrap();
        let map = ClassMap::four_way();
        let spec = AugmentSpec {
            seed: 11,
            ..AugmentSpec::default()
        };
        batches(&items, &map, 3, Some(8), 1, Some(spec))
            .unwrap()
            .map(|b| b.unwrap())
            .flat_map(|b| b.rgb.data().to_vec())
            .collect::<Vec<f64>>()
    };
    assert_eq!(run(), run());
    std::fs::remove_dir_all(&root).unwrap();
}

#[test]
fn one_hot_is_a_bijection_onto_the_basis_vectors() {
    let map = ClassMap::four_way();
    let mut seen = Vec::new();
    for name in CLASS_NAMES {
        let v = map.one_hot(name).unwrap();
        assert_eq!(v.sum(), 1.0);
        let idx = v.argmax().unwrap();
        assert_eq!(v.data()[idx], 1.0);
        assert!(!seen.contains(&idx), "class index {idx} reused");
        seen.push(idx);
    }
    assert_eq!(seen.len(), CLASS_NAMES.len());
}
