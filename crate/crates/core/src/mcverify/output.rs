use std::io::Write;

use super::{ReplicationRecord, SummaryStats};
use crate::error::Result;

/// Labels written in front of every CSV row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunMeta {
    pub experiment: String,
    pub model: String,
    pub combiner: String,
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes records with one `theta_hat_i` column per θ component.
pub fn write_records<W: Write>(
    out: W,
    meta: &RunMeta,
    records: &[ReplicationRecord],
) -> Result<()> {
    let dim = records.iter().map(|r| r.theta_hat.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "experiment".to_string(),
        "model".into(),
        "combiner".into(),
        "n".into(),
        "rep".into(),
        "seed".into(),
    ];
    header.extend((0..dim).map(|i| format!("theta_hat_{i}")));
    header.extend(["estimate", "truth", "influence_mean", "residual"].map(String::from));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            meta.experiment.clone(),
            meta.model.clone(),
            meta.combiner.clone(),
            r.n.to_string(),
            r.rep_id.to_string(),
            r.seed.to_string(),
        ];
        row.extend((0..dim).map(|i| r.theta_hat.get(i).map_or_else(String::new, |v| real(*v))));
        row.extend(
            [
                r.functional_value,
                r.truth_value,
                r.influence_mean,
                r.residual,
            ]
            .map(real),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summaries<W: Write>(out: W, meta: &RunMeta, summaries: &[SummaryStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "experiment",
        "model",
        "combiner",
        "n",
        "reps",
        "failures",
        "mean",
        "variance",
        "median_residual",
        "mc_se",
    ])?;
    for s in summaries {
        let mut row = vec![
            meta.experiment.clone(),
            meta.model.clone(),
            meta.combiner.clone(),
            s.n.to_string(),
            s.reps.to_string(),
            s.failures.to_string(),
        ];
        row.extend([s.mean, s.variance, s.median_residual, s.mc_se].map(real));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_header_and_round_trip() {
        let meta = RunMeta {
            experiment: "e".into(),
            model: "location".into(),
            combiner: "direct".into(),
        };
        let rec = ReplicationRecord {
            rep_id: 3,
            n: 100,
            seed: 42,
            theta_hat: vec![0.1, -2.5],
            functional_value: 1.0 / 3.0,
            truth_value: 0.5,
            influence_mean: -0.125,
            residual: 0.7,
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &meta, std::slice::from_ref(&rec)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "experiment,model,combiner,n,rep,seed,theta_hat_0,theta_hat_1,estimate,truth,influence_mean,residual"
        );
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[8].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fields[6], "1.0000000000000001e-1");
    }
}
