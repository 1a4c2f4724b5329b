//! The bundled reference model: a corporate web service described on
//! four layers, with redundant switching and a replicated server pair on
//! the physical layer.

use crate::model::{parse_model, LayeredModel};

/// Raw JSON of the reference model, compiled in from
/// `models/casestudy.json`.
pub const CASE_STUDY_JSON: &str = include_str!("../../../models/casestudy.json");

/// Repository-relative path of the reference model file.
pub const CASE_STUDY_PATH: &str = "models/casestudy.json";

/// Parses [`CASE_STUDY_JSON`]. The bundled document is kept valid, so
/// this never fails.
pub fn case_study() -> LayeredModel {
    parse_model(CASE_STUDY_JSON).expect("bundled case-study model parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;

    #[test]
    fn case_study_parses_and_validates_clean() {
        let model = case_study();
        let report = validate_model(&model);
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn case_study_shape() {
        let model = case_study();
        assert_eq!(model.depth(), 4);
        let sizes: Vec<usize> = model.layers.iter().map(|l| l.components.len()).collect();
        assert_eq!(sizes, vec![6, 5, 4, 2]);
        let links: Vec<usize> = model.layers.iter().map(|l| l.links.len()).collect();
        assert_eq!(links, vec![9, 4, 4, 1]);
        assert_eq!(model.projections.len(), 3);
        assert_eq!(model.requirements.len(), 3);
        assert_eq!(model.probabilities.len(), 4);
        assert_eq!(model.probability_of(&"Server_1".into()), 0.8258);
        assert_eq!(model.probability_of(&"Switch_1".into()), 0.9869);
        assert_eq!(model.probability_of(&"Switch_2".into()), 0.9778);
        // Unpriced components count as always operational.
        assert_eq!(model.probability_of(&"WS_1".into()), 1.0);
    }

    #[test]
    fn case_study_canonical_form_is_a_fixpoint() {
        let canonical = case_study().to_canonical_json();
        let reparsed = parse_model(&canonical).unwrap();
        assert_eq!(reparsed.to_canonical_json(), canonical);
    }
}
