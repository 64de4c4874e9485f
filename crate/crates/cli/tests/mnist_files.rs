use std::path::PathBuf;

use sac_cli::idx::{load_mnist, read_images, read_labels, split_paths, Split, RESIZED_SIDE};

fn data_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("MNIST_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("/root/data/mnist"));
    let (images, labels) = split_paths(&dir, Split::Test);
    if images.exists() && labels.exists() {
        Some(dir)
    } else {
        eprintln!("skipping: no IDX files under {}", dir.display());
        None
    }
}

#[test]
fn training_split_shape() {
    let Some(dir) = data_dir() else { return };
    let (images, labels) = split_paths(&dir, Split::Train);
    let images = read_images(&images).unwrap();
    assert_eq!((images.rows, images.cols), (28, 28));
    assert_eq!(images.pixels.len(), 60_000);
    assert!(images.pixels.iter().all(|p| p.len() == 784));
    let labels = read_labels(&labels).unwrap();
    assert_eq!(labels.len(), 60_000);
    let mut seen = [false; 10];
    labels.iter().for_each(|&l| seen[l as usize] = true);
    assert!(seen.iter().all(|&s| s));
}

#[test]
fn resized_test_split() {
    let Some(dir) = data_dir() else { return };
    let data = load_mnist(&dir, Split::Test, 1.0).unwrap();
    assert_eq!(data.len(), 10_000);
    assert_eq!(data.class_count, 10);
    assert!(data.features.iter().all(|f| f.len() == RESIZED_SIDE * RESIZED_SIDE));
    assert!(data.features.iter().flatten().all(|&v| (0.0..=1.0).contains(&v)));

    let a = data.subset(1000, 0).unwrap();
    let b = data.subset(1000, 0).unwrap();
    assert_eq!(a.labels, b.labels);
    assert_eq!(a.features, b.features);
    assert_ne!(data.subset(1000, 1).unwrap().labels, a.labels);
}
