use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub struct SoftmaxXent {
    /// Batch-mean cross-entropy.
    pub loss: f64,
    /// `(probs - onehot) / B`
    pub grad_logits: Tensor,
    pub probs: Tensor,
}

/// Max-shifted softmax fused with categorical cross-entropy.
pub fn softmax_xent(logits: &Tensor, labels: &[usize]) -> Result<SoftmaxXent> {
    let (b, c) = logits.dims2("softmax logits")?;
    if labels.len() != b {
        return Err(Error::dim(format!(
            "{} labels for a batch of {b}",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
        return Err(Error::Label {
            label: bad,
            classes: c,
        });
    }
    let mut probs = vec![0.0; b * c];
    let mut loss = 0.0;
    for ((row, out), &label) in logits
        .data()
        .chunks_exact(c)
        .zip(probs.chunks_exact_mut(c))
        .zip(labels)
    {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for (o, &v) in out.iter_mut().zip(row) {
            *o = (v - max).exp();
            z += *o;
        }
        for o in out.iter_mut() {
            *o /= z;
        }
        // log-sum-exp form stays finite even when the true class underflows
        loss += z.ln() - (row[label] - max);
    }
    loss /= b as f64;

    let mut grad = probs.clone();
    for (row, &label) in grad.chunks_exact_mut(c).zip(labels) {
        row[label] -= 1.0;
        for g in row.iter_mut() {
            *g /= b as f64;
        }
    }
    Ok(SoftmaxXent {
        loss,
        grad_logits: Tensor::new(vec![b, c], grad)?,
        probs: Tensor::new(vec![b, c], probs)?,
    })
}
