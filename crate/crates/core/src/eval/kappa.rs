use crate::data::CrowdDataset;
use crate::error::{Error, Result};

/// Cohen's kappa between two label sequences of equal length.
///
/// When chance agreement is 1 (both raters constant on the same label) the
/// result is 1 if they agree everywhere.
pub fn cohen_kappa(a: &[usize], b: &[usize], num_labels: usize) -> f64 {
    assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return 0.0;
    }
    let n = a.len() as f64;
    let mut ma = vec![0usize; num_labels];
    let mut mb = vec![0usize; num_labels];
    let mut agree = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        ma[x] += 1;
        mb[y] += 1;
        agree += usize::from(x == y);
    }
    let po = agree as f64 / n;
    let pe: f64 = ma
        .iter()
        .zip(&mb)
        .map(|(&ca, &cb)| (ca as f64 / n) * (cb as f64 / n))
        .sum();
    if (1.0 - pe).abs() < 1e-15 {
        return if po >= 1.0 { 1.0 } else { 0.0 };
    }
    (po - pe) / (1.0 - pe)
}

fn require_annotators(dataset: &CrowdDataset) -> Result<usize> {
    let k = dataset.annotator_count().ok_or_else(|| {
        Error::invalid("dataset", "kappa needs per-annotator tags")
    })?;
    if k < 2 {
        return Err(Error::invalid("dataset", "kappa needs at least two annotators"));
    }
    Ok(k)
}

/// Token-level Cohen's kappa averaged over all annotator pairs. Tokens that
/// either annotator skipped are ignored for that pair.
pub fn pairwise_kappa(dataset: &CrowdDataset) -> Result<f64> {
    let k = require_annotators(dataset)?;
    let num_labels = dataset.label_space().len();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..k {
        for j in i + 1..k {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for tok in dataset.items().iter().flat_map(|s| &s.tokens) {
                let tags = tok.annotations().expect("validated");
                if let (Some(x), Some(y)) = (tags[i], tags[j]) {
                    a.push(x);
                    b.push(y);
                }
            }
            total += cohen_kappa(&a, &b, num_labels);
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Fleiss' kappa over tokens labeled by every annotator.
pub fn fleiss_kappa(dataset: &CrowdDataset) -> Result<f64> {
    let k = require_annotators(dataset)?;
    let num_labels = dataset.label_space().len();
    let mut category_totals = vec![0usize; num_labels];
    let mut agreement_sum = 0.0;
    let mut items = 0usize;
    for tok in dataset.items().iter().flat_map(|s| &s.tokens) {
        let tags = tok.annotations().expect("validated");
        if tags.iter().any(Option::is_none) {
            continue;
        }
        let mut agreeing_pairs = 0usize;
        for (&label, &c) in tok.counts() {
            category_totals[label] += c as usize;
            agreeing_pairs += (c as usize) * (c as usize - 1);
        }
        agreement_sum += agreeing_pairs as f64 / (k * (k - 1)) as f64;
        items += 1;
    }
    if items == 0 {
        return Ok(0.0);
    }
    let p_bar = agreement_sum / items as f64;
    let ratings = (items * k) as f64;
    let pe: f64 = category_totals
        .iter()
        .map(|&c| (c as f64 / ratings).powi(2))
        .sum();
    if (1.0 - pe).abs() < 1e-15 {
        return Ok(if p_bar >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_bar - pe) / (1.0 - pe))
}
