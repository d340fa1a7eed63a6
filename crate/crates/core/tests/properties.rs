use coror_core::matcher::min_score;
use coror_core::metrics::det_curve;
use coror_core::orientation::{quantize_angle, OrientationField};
use coror_core::preprocess::segment;
use coror_core::{cityblock, compute_metrics, GrayImage, ScoreSet, TemplateDb, TemplateRecord};
use proptest::prelude::*;

fn vecs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, n)
}

fn scores() -> impl Strategy<Value = ScoreSet> {
    (
        prop::collection::vec(0.0..50.0f64, 1..80),
        prop::collection::vec(0.0..50.0f64, 1..80),
    )
        .prop_map(|(genuine, impostor)| ScoreSet { genuine, impostor })
}

fn record(subject: &str, fused: Vec<f64>) -> TemplateRecord {
    TemplateRecord {
        subject_id: subject.into(),
        finger_id: None,
        model_hash: "m".into(),
        image_hash: String::new(),
        config_hash: String::new(),
        fused,
    }
}

proptest! {
    #[test]
    fn cityblock_is_a_metric((a, b, c) in (1usize..40).prop_flat_map(|n| (vecs(n), vecs(n), vecs(n)))) {
        let ab = cityblock(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(cityblock(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab, cityblock(&b, &a).unwrap());
        let slack = 1e-9 * (1.0 + ab);
        prop_assert!(ab <= cityblock(&a, &c).unwrap() + cityblock(&c, &b).unwrap() + slack);
    }

    #[test]
    fn metrics_ignore_order_and_duplication(s in scores(), seed in any::<u64>()) {
        let m = compute_metrics(&s).unwrap();
        let mut shuffled = s.clone();
        let k = (seed as usize) % shuffled.genuine.len().max(1);
        shuffled.genuine.rotate_left(k);
        shuffled.impostor.reverse();
        let m2 = compute_metrics(&shuffled).unwrap();
        prop_assert_eq!(m.eer, m2.eer);
        let doubled = ScoreSet {
            genuine: s.genuine.iter().chain(&s.genuine).copied().collect(),
            impostor: s.impostor.iter().chain(&s.impostor).copied().collect(),
        };
        let m3 = compute_metrics(&doubled).unwrap();
        prop_assert!((m.eer - m3.eer).abs() < 1e-12);
        prop_assert_eq!(m.zero_fmr, m3.zero_fmr);
        prop_assert_eq!(m.fmr100, m3.fmr100);
    }

    #[test]
    fn det_monotone_and_rates_bounded(s in scores()) {
        let det = det_curve(&s).unwrap();
        for w in det.windows(2) {
            prop_assert!(w[0].threshold < w[1].threshold);
            prop_assert!(w[0].fmr <= w[1].fmr);
            prop_assert!(w[0].fnmr >= w[1].fnmr);
        }
        let m = compute_metrics(&s).unwrap();
        for v in [m.eer, m.fmr100, m.fmr1000, m.zero_fmr] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(m.fmr1000 >= m.fmr100);
        prop_assert!(m.zero_fmr >= m.fmr1000);
    }

    /// Without ties each sweep step moves one rate by one count, so the
    /// interpolated EER stays within half a step of the discrete optimum.
    #[test]
    fn eer_close_to_sweep_without_ties(
        g in prop::collection::hash_set(0u32..100_000, 1..120),
        i in prop::collection::hash_set(100_000u32..200_000, 1..120),
        shift in 0u32..100_000,
    ) {
        let genuine: Vec<f64> = g.iter().map(|&v| f64::from(v)).collect();
        let impostor: Vec<f64> = i.iter().map(|&v| f64::from(v - shift)).collect();
        let s = ScoreSet { genuine, impostor };
        if s.genuine.iter().any(|v| s.impostor.contains(v)) {
            return Ok(());
        }
        let m = compute_metrics(&s).unwrap();
        let (ng, ni) = (s.genuine.len() as f64, s.impostor.len() as f64);
        let mut best = (f64::INFINITY, 0.0);
        for p in &m.det {
            if (p.fmr - p.fnmr).abs() < best.0 {
                best = ((p.fmr - p.fnmr).abs(), (p.fmr + p.fnmr) / 2.0);
            }
        }
        // include the start point (nothing accepted)
        if 1.0 < best.0 {
            best = (1.0, 0.5);
        }
        let step = (1.0 / ng).max(1.0 / ni);
        prop_assert!((m.eer - best.1).abs() <= step / 2.0 + 1e-12, "eer {} sweep {}", m.eer, best.1);
        prop_assert!(best.0 <= step + 1e-12);
    }

    #[test]
    fn adding_templates_never_raises_score(
        (probe, ts) in (1usize..16).prop_flat_map(|n| (vecs(n), prop::collection::vec(vecs(n), 1..6)))
    ) {
        let mut db = TemplateDb::new("m");
        let mut last = f64::INFINITY;
        for t in ts {
            db.insert(record("s", t)).unwrap();
            let r = db.score("s", &probe).unwrap();
            prop_assert!(r.score <= last);
            prop_assert_eq!(r.score, min_score(&r.per_template_scores));
            last = r.score;
        }
    }

    #[test]
    fn quantized_levels_in_range(deg in 0.0..180.0f64) {
        let q = quantize_angle(deg.to_radians());
        prop_assert!((1..=8).contains(&q));
        if deg > 1e-9 {
            let lo = 22.5 * f64::from(q - 1);
            prop_assert!(deg > lo - 1e-9 && deg <= lo + 22.5 + 1e-9, "{deg} -> {q}");
        }
    }

    #[test]
    fn offset_field_stays_in_range(theta in prop::collection::vec(0.0..std::f64::consts::PI, 16), delta in -10.0..10.0f64) {
        let f = OrientationField::from_angles(4, 4, theta).unwrap().offset(delta);
        prop_assert!(f.theta.iter().all(|t| (0.0..std::f64::consts::PI).contains(t)));
    }

    #[test]
    fn segmentation_monotone_in_threshold(seed in any::<u64>(), t1 in 0.0..400.0f64, t2 in 0.0..400.0f64) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let mut state = seed | 1;
        let img = GrayImage::from_fn(64, 64, |x, y| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let amp = if (x / 16 + y / 16) % 3 == 0 { 60.0 } else { 5.0 };
            128.0 + amp * ((state % 1000) as f64 / 500.0 - 1.0)
        });
        if let (Ok(a), Ok(b)) = (segment(&img, 16, lo), segment(&img, 16, hi)) {
            prop_assert!(a.flags().iter().zip(b.flags()).all(|(x, y)| *x || !*y));
        }
    }
}

#[test]
fn identical_distributions_balance() {
    // deterministic interleaving: every genuine score has an impostor twin
    let genuine: Vec<f64> = (0..1000).map(|i| f64::from(i) * 2.0).collect();
    let impostor: Vec<f64> = (0..1000).map(|i| f64::from(i) * 2.0 + 1.0).collect();
    let m = compute_metrics(&ScoreSet { genuine, impostor }).unwrap();
    assert!((m.eer - 0.5).abs() <= 1e-3, "{}", m.eer);
}
