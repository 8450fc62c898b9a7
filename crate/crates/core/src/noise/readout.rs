use crate::error::{Error, Result};

/// Single-qubit response matrix, `r[i][j] = P(measure i | prepared j)`.
pub type Response = [[f64; 2]; 2];

const STOCHASTIC_TOL: f64 = 1e-9;

fn invert(r: &Response) -> Result<Response> {
    let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
    if det.abs() < 1e-12 {
        return Err(Error::Singular(format!("response matrix {r:?}")));
    }
    Ok([
        [r[1][1] / det, -r[0][1] / det],
        [-r[1][0] / det, r[0][0] / det],
    ])
}

fn apply_per_qubit(hist: &[f64], mats: &[Response]) -> Vec<f64> {
    let n = mats.len();
    let mut v = hist.to_vec();
    for (q, m) in mats.iter().enumerate() {
        let bit = 1usize << (n - 1 - q);
        for i in 0..v.len() {
            if i & bit == 0 {
                let (a, b) = (v[i], v[i | bit]);
                v[i] = m[0][0] * a + m[0][1] * b;
                v[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }
    v
}

fn check(hist: &[f64], responses: &[Response]) -> Result<()> {
    if hist.len() != 1 << responses.len() {
        return Err(Error::WrongDimension {
            expected: 1 << responses.len(),
            got: hist.len(),
        });
    }
    for r in responses {
        for j in 0..2 {
            let col = r[0][j] + r[1][j];
            if (col - 1.0).abs() > STOCHASTIC_TOL || r[0][j] < 0.0 || r[1][j] < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "response matrix {r:?} is not column stochastic"
                )));
            }
        }
    }
    let total: f64 = hist.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidParameter(format!("histogram sums to {total}")));
    }
    Ok(())
}

/// Applies `R_0 (x) R_1 (x) ...` to a distribution over bitstrings, qubit 0
/// being the most significant bit.
pub fn apply_readout(hist: &[f64], responses: &[Response]) -> Result<Vec<f64>> {
    check(hist, responses)?;
    Ok(apply_per_qubit(hist, responses))
}

/// Undoes readout error with the per-qubit inverse responses. With `clip`
/// the result is projected onto the probability simplex.
pub fn correct_readout(hist: &[f64], responses: &[Response], clip: bool) -> Result<Vec<f64>> {
    check(hist, responses)?;
    let inv = responses.iter().map(invert).collect::<Result<Vec<_>>>()?;
    let v = apply_per_qubit(hist, &inv);
    Ok(if clip { project_to_simplex(&v) } else { v })
}

/// Euclidean projection onto `{x >= 0, sum x = 1}`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: Response = [[0.95, 0.05], [0.05, 0.95]];

    #[test]
    fn identity_response() {
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let h = vec![0.1, 0.2, 0.3, 0.4];
        assert_eq!(correct_readout(&h, &[id, id], false).unwrap(), h);
    }

    #[test]
    fn one_qubit_by_hand() {
        let c = correct_readout(&[0.95, 0.05], &[R], false).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && c[1].abs() < 1e-12);
    }

    #[test]
    fn two_qubit_round_trip() {
        let noisy = apply_readout(&[1.0, 0.0, 0.0, 0.0], &[R, R]).unwrap();
        let c = correct_readout(&noisy, &[R, R], false).unwrap();
        for (x, y) in c.iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn errors() {
        let singular = [[0.5, 0.5], [0.5, 0.5]];
        assert!(matches!(correct_readout(&[0.5, 0.5], &[singular], false), Err(Error::Singular(_))));
        assert!(correct_readout(&[0.5, 0.5], &[[[0.9, 0.2], [0.2, 0.8]]], false).is_err());
        assert!(correct_readout(&[0.5, 0.4], &[R], false).is_err());
    }

    #[test]
    fn clipping() {
        let c = correct_readout(&[1.0, 0.0], &[R], true).unwrap();
        assert!(c.iter().all(|&x| x >= 0.0));
        assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let p = project_to_simplex(&[0.5, 0.7, -0.2]);
        assert!((p[0] - 0.4).abs() < 1e-12 && (p[1] - 0.6).abs() < 1e-12 && p[2] == 0.0);
    }
}
