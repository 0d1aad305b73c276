use gifs::algorithms::{grid_step, snap};
use gifs::metrics::{hausdorff_with, Method};
use gifs::render::rasterize;
use gifs::sysio::{parse_document, NamedMap, SystemDocument};
use gifs::{AffineMap, PointSet, SnapMode};
use proptest::prelude::*;

fn points(dim: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![0.0..=1.0f64, (0u32..=16).prop_map(|k| k as f64 / 16.0)],
        dim..=dim * max,
    )
    .prop_map(move |mut v| {
        v.truncate(v.len() / dim * dim);
        v
    })
}

/// Minimal independent P6 reader: returns (width, height, rows top-down).
fn read_ppm(bytes: &[u8]) -> (usize, usize, Vec<Vec<bool>>) {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap().to_string());
    }
    pos += 1;
    assert_eq!(fields[0], "P6");
    assert_eq!(fields[3], "255");
    let (w, h): (usize, usize) = (fields[1].parse().unwrap(), fields[2].parse().unwrap());
    let body = &bytes[pos..];
    assert_eq!(body.len(), w * h * 3);
    let rows = body
        .chunks(w * 3)
        .map(|row| {
            row.chunks(3)
                .map(|px| match px {
                    [0, 0, 0] => true,
                    [255, 255, 255] => false,
                    other => panic!("unexpected pixel {other:?}"),
                })
                .collect()
        })
        .collect();
    (w, h, rows)
}

proptest! {
    #[test]
    fn snapping_displacement(v in prop::collection::vec(0.0..=1.0f64, 1..=3), n in 1u32..500, side in 0.1..10.0f64) {
        let v: Vec<f64> = v.iter().map(|x| x * side).collect();
        let diag = side * (v.len() as f64).sqrt() / n as f64;
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let floor = snap(&v, n, side, SnapMode::Floor).unwrap();
        let round = snap(&v, n, side, SnapMode::Round).unwrap();
        prop_assert!(dist(&v, &floor) < diag);
        prop_assert!(dist(&v, &round) <= diag / 2.0 + 1e-12);
        prop_assert_eq!(snap(&floor, n, side, SnapMode::Floor).unwrap(), floor);
        prop_assert_eq!(snap(&round, n, side, SnapMode::Round).unwrap(), round);
    }

    #[test]
    fn accelerated_hausdorff_is_exact(dim in 1usize..=3, a in points(3, 300), b in points(3, 300)) {
        let trim = |v: Vec<f64>| { let k = v.len() / dim * dim; v[..k].to_vec() };
        let (a, b) = (trim(a), trim(b));
        prop_assume!(!a.is_empty() && !b.is_empty());
        let a = PointSet::new(dim, 1.0, a).unwrap();
        let b = PointSet::new(dim, 1.0, b).unwrap();
        let fast = hausdorff_with(&a, &b, Method::Bucketed).unwrap();
        let slow = hausdorff_with(&a, &b, Method::BruteForce).unwrap();
        prop_assert_eq!(fast, slow);
        prop_assert_eq!(fast.h, hausdorff_with(&b, &a, Method::Bucketed).unwrap().h);
    }

    #[test]
    fn canonical_order_ignores_input_order(v in points(2, 50), seed in any::<u64>()) {
        prop_assume!(!v.is_empty());
        let mut pts: Vec<[f64; 2]> = v.chunks(2).map(|c| [c[0], c[1]]).collect();
        let a = PointSet::new(2, 1.0, pts.concat()).unwrap();
        let k = pts.len();
        pts.rotate_left((seed as usize) % k);
        pts.reverse();
        let b = PointSet::new(2, 1.0, pts.concat()).unwrap();
        prop_assert_eq!(&a, &b);
        let ra = rasterize(&a, 37, 23, (0, 1)).unwrap();
        let rb = rasterize(&b, 37, 23, (0, 1)).unwrap();
        prop_assert_eq!(&ra, &rb);
    }

    #[test]
    fn ppm_roundtrip(v in points(2, 60), w in 1usize..40, h in 1usize..40) {
        prop_assume!(!v.is_empty());
        let s = PointSet::new(2, 1.0, v).unwrap();
        let r = rasterize(&s, w, h, (0, 1)).unwrap();
        let (rw, rh, rows) = read_ppm(&r.to_ppm());
        prop_assert_eq!((rw, rh), (w, h));
        for (top, row) in rows.iter().enumerate() {
            for (x, &set) in row.iter().enumerate() {
                prop_assert_eq!(set, r.get(x, h - 1 - top));
            }
        }
    }

    #[test]
    fn document_roundtrip(
        dim in 1usize..=3,
        order in 1usize..=3,
        raw in prop::collection::vec(prop_oneof![any::<f64>(), -1.0..1.0f64, Just(0.0)], 60),
        maps in 1usize..=3,
    ) {
        let finite: Vec<f64> = raw.into_iter().map(|x| if x.is_finite() { x } else { 0.5 }).collect();
        let per_map = order * dim * dim + dim;
        prop_assume!(finite.len() >= per_map * maps);
        let named = (0..maps).map(|m| {
            let c = &finite[m * per_map..(m + 1) * per_map];
            let blocks = (0..order).map(|j| c[j * dim * dim..(j + 1) * dim * dim].to_vec()).collect();
            NamedMap { name: format!("g{m}"), map: AffineMap::new(blocks, c[order * dim * dim..].to_vec()).unwrap() }
        }).collect();
        let doc = SystemDocument { comments: vec!["x".into()], dim, order, side: 1.5, maps: named };
        prop_assert_eq!(parse_document(&doc.to_text()).unwrap(), doc);
    }
}

#[test]
fn deleting_any_token_is_rejected() {
    let source: String = gifs::Example::C
        .source()
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let tokens: Vec<(usize, usize)> = {
        let mut out = Vec::new();
        let mut start = None;
        for (i, ch) in source.char_indices() {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    out.push((s, i));
                    start = None;
                }
                _ => {}
            }
        }
        out
    };
    assert!(parse_document(&source).is_ok());
    for (s, e) in tokens {
        let mutated = format!("{}{}", &source[..s], &source[e..]);
        assert!(parse_document(&mutated).is_err(), "deleting {:?} was accepted", &source[s..e]);
    }
}

#[test]
fn grid_step_matches_naive_enumeration() {
    let system = gifs::builtin(gifs::Example::A);
    let prev = PointSet::new(2, 1.0, vec![0.1, 0.2, 0.5, 0.5, 0.9, 0.35, 0.0, 1.0]).unwrap();
    for mode in [SnapMode::Floor, SnapMode::Round] {
        let n = 37;
        let fast = grid_step(&system, &prev, n, mode, u64::MAX).unwrap().points;
        let mut naive = Vec::new();
        for f in system.maps() {
            for u in prev.iter() {
                for v in prev.iter() {
                    naive.extend(snap(&f.apply(&[u, v]).unwrap(), n, 1.0, mode).unwrap());
                }
            }
        }
        assert_eq!(fast, PointSet::new(2, 1.0, naive).unwrap());
    }
}
