//! Property tests over arbitrary rasters: run-length coding must round
//! trip, dilation must be monotone and distribute over union, and thinning
//! must preserve what scribbles depend on.

use proptest::prelude::*;
use scribbleval_core::raster::components::{connected_components, Connectivity};
use scribbleval_core::raster::morph::{dilate, skeletonize};
use scribbleval_core::raster::rle::{decode_runs, encode_runs};
use scribbleval_core::raster::{BinaryMask, RasterSize, StructuringElement};

fn mask_strategy(max_side: u32) -> impl Strategy<Value = BinaryMask> {
    (1..=max_side, 1..=max_side)
        .prop_flat_map(|(w, h)| {
            let n = (w * h) as usize;
            (Just((w, h)), prop::collection::vec(any::<bool>(), n))
        })
        .prop_map(|((w, h), bits)| {
            let size = RasterSize::new(w, h).unwrap();
            BinaryMask::from_fn(size, |x, y| bits[(y * w + x) as usize])
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn rle_round_trips(mask in mask_strategy(24)) {
        let runs = encode_runs(&mask);
        let decoded = decode_runs(mask.size(), &runs).unwrap();
        prop_assert_eq!(&decoded, &mask);
        // canonical form: no interior zero runs, at most a leading one
        prop_assert!(runs.iter().skip(1).all(|&r| r > 0));
        prop_assert_eq!(
            runs.iter().map(|&r| r as usize).sum::<usize>(),
            mask.size().pixel_count()
        );
    }

    #[test]
    fn dilation_grows_monotonically(mask in mask_strategy(16), r in 0u32..3) {
        let small = dilate(&mask, StructuringElement::disk(r));
        let large = dilate(&mask, StructuringElement::disk(r + 1));
        prop_assert!(mask.is_subset_of(&small));
        prop_assert!(small.is_subset_of(&large));
    }

    #[test]
    fn dilation_distributes_over_union(a in mask_strategy(12), bits in prop::collection::vec(any::<bool>(), 144)) {
        let size = a.size();
        let w = size.width();
        let b = BinaryMask::from_fn(size, |x, y| bits[((y * w + x) as usize) % bits.len()]);
        let se = StructuringElement::disk(2);
        let mut union = a.clone();
        union.union_with(&b);
        let left = dilate(&union, se);
        let mut right = dilate(&a, se);
        right.union_with(&dilate(&b, se));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn skeleton_is_contained_and_preserves_components(mask in mask_strategy(16)) {
        let skeleton = skeletonize(&mask);
        prop_assert!(skeleton.is_subset_of(&mask));
        prop_assert_eq!(
            connected_components(&skeleton, Connectivity::Eight).len(),
            connected_components(&mask, Connectivity::Eight).len()
        );
        // unit width: no fully-set 2x2 block survives
        let (w, h) = (mask.size().width(), mask.size().height());
        for y in 0..h.saturating_sub(1) {
            for x in 0..w.saturating_sub(1) {
                let block = skeleton.get(x, y)
                    && skeleton.get(x + 1, y)
                    && skeleton.get(x, y + 1)
                    && skeleton.get(x + 1, y + 1);
                prop_assert!(!block, "2x2 block at ({}, {})", x, y);
            }
        }
        // deterministic
        prop_assert_eq!(skeletonize(&mask), skeleton);
    }
}
