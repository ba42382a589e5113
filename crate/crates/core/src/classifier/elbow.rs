use crate::ontology::TopicId;

/// Sort by relevance (descending, ties by id) and cut the curve at its knee.
///
/// Scores and ranks are min-max normalized; the knee is the point farthest from
/// the chord joining the first and last points, smallest index on ties. A knee
/// below the chord is the first point of the tail and is cut; a knee above the
/// chord is the last point of the head and is kept. Curves with fewer than three
/// points, flat curves, and curves that never leave the chord keep everything.
pub fn elbow_select(scored: &[(TopicId, f64)]) -> Vec<TopicId> {
    let mut sorted: Vec<&(TopicId, f64)> = scored.iter().collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let keep = knee_cut(&sorted.iter().map(|(_, s)| *s).collect::<Vec<_>>());
    sorted.into_iter().take(keep).map(|(t, _)| t.clone()).collect()
}

const DISTANCE_EPS: f64 = 1e-12;

/// Number of leading items to keep from a score curve sorted descending.
pub fn knee_cut(scores: &[f64]) -> usize {
    let n = scores.len();
    if n < 3 {
        return n;
    }
    let (first, last) = (scores[0], scores[n - 1]);
    let (max, min) = scores
        .iter()
        .fold((f64::MIN, f64::MAX), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if max == min {
        return n;
    }
    let y: Vec<f64> = scores.iter().map(|s| (s - min) / (max - min)).collect();
    let (y0, y1) = ((first - min) / (max - min), (last - min) / (max - min));
    // chord from (0, y0) to (1, y1): (y1 - y0) x - y + y0 = 0
    let a = y1 - y0;
    let norm = (a * a + 1.0).sqrt();
    // (index, distance, below the chord)
    let mut best = (0usize, 0.0f64, false);
    for (i, yi) in y.iter().enumerate() {
        let x = i as f64 / (n - 1) as f64;
        let signed = (a * x + y0 - yi) / norm;
        if signed.abs() > best.1 + DISTANCE_EPS {
            best = (i, signed.abs(), signed > 0.0);
        }
    }
    match best {
        (0, _, _) => n,
        (i, _, true) => i,
        (i, _, false) => i + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scored(values: &[f64]) -> Vec<(TopicId, f64)> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| (TopicId::new(&format!("t{i:02}")).unwrap(), v))
            .collect()
    }

    #[test]
    fn sharp_drop_keeps_head() {
        let picked = elbow_select(&scored(&[100.0, 90.0, 10.0, 9.0, 8.0]));
        assert_eq!(picked.len(), 2);
        assert_eq!(picked[0].as_str(), "t00");
        assert_eq!(picked[1].as_str(), "t01");
    }

    #[test]
    fn input_order_does_not_matter() {
        let mut s = scored(&[100.0, 90.0, 10.0, 9.0, 8.0]);
        s.reverse();
        assert_eq!(elbow_select(&s).len(), 2);
    }

    #[test]
    fn flat_and_tiny_curves_keep_all() {
        assert_eq!(elbow_select(&scored(&[10.0, 10.0, 10.0])).len(), 3);
        assert_eq!(elbow_select(&scored(&[5.0, 1.0])).len(), 2);
        assert_eq!(elbow_select(&scored(&[5.0])).len(), 1);
        assert!(elbow_select(&[]).is_empty());
        // straight line: no point leaves the chord
        assert_eq!(elbow_select(&scored(&[3.0, 2.0, 1.0])).len(), 3);
    }

    #[test]
    fn concave_head_is_kept() {
        assert_eq!(knee_cut(&[100.0, 99.0, 98.0, 1.0]), 3);
        assert_eq!(knee_cut(&[100.0, 20.0, 10.0, 5.0, 4.0, 3.0]), 1);
    }

    #[test]
    fn ties_sort_by_topic_id() {
        let s = vec![
            (TopicId::new("b").unwrap(), 50.0),
            (TopicId::new("a").unwrap(), 50.0),
            (TopicId::new("c").unwrap(), 1.0),
            (TopicId::new("d").unwrap(), 1.0),
        ];
        let picked = elbow_select(&s);
        assert_eq!(picked.iter().map(|t| t.as_str()).collect::<Vec<_>>(), vec!["a", "b"]);
    }
}
