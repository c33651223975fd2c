#![allow(dead_code)]

use semiplug::models::{
    CovariateLaw, CoxModel, ErrorLaw, LocationModel, Model, StdRegressionModel, SymRegressionModel,
    TwoSampleModel,
};

pub fn location(law: ErrorLaw) -> Model {
    Model::Location(LocationModel { theta0: 0.7, law })
}

pub fn sym_regression(law: ErrorLaw) -> Model {
    Model::SymRegression(
        SymRegressionModel::new(
            vec![1.0, -0.5],
            law,
            CovariateLaw::StandardNormal { dim: 2 },
        )
        .unwrap(),
    )
}

pub fn std_regression(law: ErrorLaw) -> Model {
    Model::StdRegression(
        StdRegressionModel::new(vec![0.5, 1.0], 2.0, law, CovariateLaw::Bernoulli { dim: 1 })
            .unwrap(),
    )
}

pub fn two_sample(law: ErrorLaw) -> Model {
    Model::TwoSample(TwoSampleModel { theta0: -0.4, law })
}

pub fn cox() -> Model {
    Model::Cox(CoxModel::new(0.5, 1.0, 10f64.ln()).unwrap())
}

pub fn logistic() -> ErrorLaw {
    ErrorLaw::logistic(0.8).unwrap()
}

pub fn normal() -> ErrorLaw {
    ErrorLaw::normal(1.0).unwrap()
}
