//! Coverage scores of the three design steps.
//!
//! | step | measures | formula |
//! |------|----------|---------|
//! | 1 | attribute annotation coverage | `sum_i |R_i| / (|R| * |M|)` |
//! | 2 (explicit) | share of tasks with a relevance tag | `(|M_O| + |M_M|) / |M|` |
//! | 2 (implicit) | any relevance tag present | `0` or `1` |
//! | 3 | declared modality variants | `sum_i |m_i.V| / (3 * |M|)` |
//!
//! `R_i` only counts keys of the active catalog, so every score stays in
//! `[0, 1]`.

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::model::{ApplicationModel, Modality, Relevance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Step2Mode {
    Explicit,
    #[default]
    Implicit,
}

impl Step2Mode {
    pub fn token(self) -> &'static str {
        match self {
            Step2Mode::Explicit => "explicit",
            Step2Mode::Implicit => "implicit",
        }
    }
}

/// Per-microservice counts behind the step 1 and step 3 scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coverage {
    pub annotated_count: usize,
    pub variant_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SadpScorecard {
    pub step1: f64,
    pub step2: f64,
    pub step2_mode: Step2Mode,
    pub step3: f64,
    pub per_microservice_coverage: BTreeMap<String, Coverage>,
}

pub fn step1_score(model: &ApplicationModel) -> f64 {
    let catalog = model.catalog();
    let annotated: usize = model.microservices().iter().map(|m| m.annotated_count(catalog)).sum();
    annotated as f64 / (catalog.len() * model.len()) as f64
}

pub fn step2_score_explicit(model: &ApplicationModel) -> f64 {
    let tagged = model
        .microservices()
        .iter()
        .filter(|m| m.relevance != Relevance::Unannotated)
        .count();
    tagged as f64 / model.len() as f64
}

pub fn step2_score_implicit(model: &ApplicationModel) -> f64 {
    let any = model.microservices().iter().any(|m| m.relevance != Relevance::Unannotated);
    if any {
        1.0
    } else {
        0.0
    }
}

pub fn step3_score(model: &ApplicationModel) -> f64 {
    let declared: usize = model.microservices().iter().map(|m| m.variant_count()).sum();
    declared as f64 / (Modality::ALL.len() * model.len()) as f64
}

pub fn scorecard(model: &ApplicationModel, step2_mode: Step2Mode) -> SadpScorecard {
    let step2 = match step2_mode {
        Step2Mode::Explicit => step2_score_explicit(model),
        Step2Mode::Implicit => step2_score_implicit(model),
    };
    let per_microservice_coverage = model
        .microservices()
        .iter()
        .map(|m| {
            let cov = Coverage {
                annotated_count: m.annotated_count(model.catalog()),
                variant_count: m.variant_count(),
            };
            (m.id.clone(), cov)
        })
        .collect();
    SadpScorecard {
        step1: step1_score(model),
        step2,
        step2_mode,
        step3: step3_score(model),
        per_microservice_coverage,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_application, AttributeCatalog, ExecutionProfile, Microservice};
    use alloc::vec::Vec;

    fn model(ms: Vec<Microservice>) -> ApplicationModel {
        build_application("t", ms, Vec::new(), BTreeMap::new(), AttributeCatalog::default()).unwrap()
    }

    fn five() -> Vec<Microservice> {
        ["a", "b", "c", "d", "e"].iter().map(|id| Microservice::new(*id)).collect()
    }

    #[test]
    fn empty_coverage_is_zero() {
        let m = model(five());
        let card = scorecard(&m, Step2Mode::Implicit);
        assert_eq!((card.step1, card.step2, card.step3), (0.0, 0.0, 0.0));
        assert_eq!(step2_score_explicit(&m), 0.0);
    }

    #[test]
    fn one_task_with_two_annotations() {
        let mut ms = five();
        ms[2] = ms[2].clone().annotate("qos", "fast").annotate("cost", "low");
        assert_eq!(step1_score(&model(ms)), 2.0 / 20.0);
    }

    #[test]
    fn foreign_keys_do_not_count() {
        let ms = alloc::vec![Microservice::new("a").annotate("qos", "x").annotate("latencyy", "y")];
        assert_eq!(step1_score(&model(ms)), 0.25);
    }

    #[test]
    fn single_mandatory_tag_counts_for_implicit() {
        let mut ms = five();
        ms[0].relevance = Relevance::Mandatory;
        let m = model(ms);
        assert_eq!(step2_score_implicit(&m), 1.0);
        assert_eq!(step2_score_explicit(&m), 0.2);
    }

    #[test]
    fn one_fully_refined_task_of_five() {
        let mut ms = five();
        for md in Modality::ALL {
            ms[0].declared_variants.insert(md, ExecutionProfile::default());
        }
        assert_eq!(step3_score(&model(ms)), 0.2);
    }

    #[test]
    fn full_variant_coverage() {
        let ms = five()
            .into_iter()
            .map(|m| {
                Modality::ALL.iter().fold(m, |m, &md| m.variant(md, ExecutionProfile::default()))
            })
            .collect();
        assert_eq!(step3_score(&model(ms)), 1.0);
    }
}
