use super::vocab::Vocabulary;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// For each column of the term factor `b`, the `k` terms with the largest
/// weights in descending order; equal weights fall back to term order.
pub fn top_keywords(b: &Matrix, vocab: &Vocabulary, k: usize) -> Result<Vec<Vec<String>>> {
    if b.rows() != vocab.len() {
        return Err(Error::ShapeMismatch(format!(
            "term factor has {} rows but the vocabulary has {} terms",
            b.rows(),
            vocab.len()
        )));
    }
    if k == 0 || k > vocab.len() {
        return Err(Error::InvalidArgument(format!("k must lie in 1..={}, got {k}", vocab.len())));
    }
    Ok((0..b.cols())
        .map(|l| {
            let col = b.column(l);
            let mut order: Vec<usize> = (0..col.len()).collect();
            order.sort_by(|&x, &y| col[y].total_cmp(&col[x]).then_with(|| vocab.terms()[x].cmp(&vocab.terms()[y])));
            order[..k].iter().map(|&i| vocab.terms()[i].clone()).collect()
        })
        .collect())
}
