use super::EvalError;
use crate::corpus::Label;

/// Cohen's kappa for two binary labelings of the same items.
pub fn cohen_kappa(a: &[Label], b: &[Label]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let pos_a = a.iter().filter(|l| l.is_security()).count() as f64 / n;
    let pos_b = b.iter().filter(|l| l.is_security()).count() as f64 / n;
    let p_o = agree / n;
    let p_e = pos_a * pos_b + (1.0 - pos_a) * (1.0 - pos_b);
    if (1.0 - p_e).abs() < 1e-15 {
        return Err(EvalError::KappaUndefined);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
