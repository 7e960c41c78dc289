use super::{CredLabel, Hsn, NodeType};

/// Fills missing creator and subject labels from their articles.
///
/// The derived score is the class-fraction-weighted sum of article scores,
/// i.e. the mean article score, rounded half-up. Labels already present are
/// kept.
pub fn derive_entity_labels(hsn: &Hsn) -> Hsn {
    let mut out = hsn.clone();
    for c in 0..hsn.count(NodeType::Creator) {
        if hsn.label(NodeType::Creator, c).is_none() {
            out.set_label(NodeType::Creator, c, mean_label(hsn, hsn.articles_by(c)));
        }
    }
    for s in 0..hsn.count(NodeType::Subject) {
        if hsn.label(NodeType::Subject, s).is_none() {
            out.set_label(NodeType::Subject, s, mean_label(hsn, hsn.articles_about(s)));
        }
    }
    out
}

fn mean_label(hsn: &Hsn, articles: &[usize]) -> CredLabel {
    let n = articles.len() as u64;
    let total: u64 = articles
        .iter()
        .map(|&a| hsn.articles()[a].label.score() as u64)
        .sum();
    // floor(total / n + 1/2) in integers
    let rounded = (2 * total + n) / (2 * n);
    CredLabel::from_score(rounded as u8).expect("mean of scores in 1..=6")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures;
    use proptest::prelude::*;

    fn one_creator(labels: &[CredLabel]) -> Hsn {
        let mut b = Hsn::builder();
        b.creator("u", "p", None).subject("s", "d", None);
        for (i, l) in labels.iter().enumerate() {
            let id = format!("a{i:03}");
            b.article(&id, "text", *l).authorship(&id, "u").subject_link(&id, "s");
        }
        b.build().unwrap()
    }

    #[test]
    fn examples() {
        let g = derive_entity_labels(&one_creator(&[CredLabel::True, CredLabel::False]));
        assert_eq!(g.label(NodeType::Creator, 0), Some(CredLabel::HalfTrue));

        let g = derive_entity_labels(&one_creator(&[CredLabel::True; 3]));
        assert_eq!(g.label(NodeType::Creator, 0), Some(CredLabel::True));

        let g = derive_entity_labels(&one_creator(&[
            CredLabel::True,
            CredLabel::True,
            CredLabel::MostlyTrue,
        ]));
        assert_eq!(g.label(NodeType::Subject, 0), Some(CredLabel::True));

        // 4.5 rounds up to 5
        let g = derive_entity_labels(&one_creator(&[CredLabel::True, CredLabel::MostlyFalse]));
        assert_eq!(g.label(NodeType::Creator, 0), Some(CredLabel::MostlyTrue));
    }

    #[test]
    fn keeps_existing_labels() {
        let mut g = fixtures::toy();
        g.set_label(NodeType::Creator, 0, CredLabel::PantsOnFire);
        let d = derive_entity_labels(&g);
        assert_eq!(d.label(NodeType::Creator, 0), Some(CredLabel::PantsOnFire));
        assert!(d.is_fully_labeled());
    }

    fn label_strategy() -> impl Strategy<Value = CredLabel> {
        (0usize..6).prop_map(|i| CredLabel::ALL[i])
    }

    proptest! {
        #[test]
        fn bounded_idempotent_order_free(labels in prop::collection::vec(label_strategy(), 1..30)) {
            let g = derive_entity_labels(&one_creator(&labels));
            let score = g.label(NodeType::Creator, 0).unwrap().score();
            let lo = labels.iter().map(|l| l.score()).min().unwrap();
            let hi = labels.iter().map(|l| l.score()).max().unwrap();
            prop_assert!(lo <= score && score <= hi);
            prop_assert_eq!(&derive_entity_labels(&g), &g);

            let mut rev = labels.clone();
            rev.reverse();
            let r = derive_entity_labels(&one_creator(&rev));
            prop_assert_eq!(r.label(NodeType::Creator, 0), g.label(NodeType::Creator, 0));
            prop_assert_eq!(r.label(NodeType::Subject, 0), g.label(NodeType::Subject, 0));
        }
    }
}
