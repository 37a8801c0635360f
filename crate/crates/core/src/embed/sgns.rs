//! Skip-gram negative-sampling objective.
//!
//! For a hidden vector `h` (mean of the target's input rows) and an output
//! row `o` with label `y`, the loss term is `-log σ(o·h)` when `y` is a
//! positive context and `-log σ(-o·h)` for a negative sample. With
//! `g = σ(o·h) - y`, the gradients are `∂/∂h = g·o` and `∂/∂o = g·h`; each
//! input row receives `∂/∂h / |rows|` because `h` is their mean.
//!
//! Everything here is generic over the float type: training runs in `f32`,
//! gradient checks in `f64`.

use num_traits::Float;

pub fn sigmoid<T: Float>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus<T: Float>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

pub fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Returns `(g, loss)` for one output row, where `g = σ(o·h) - y`.
pub fn sgns_coefficient<T: Float>(hidden: &[T], output: &[T], positive: bool) -> (T, T) {
    let score = dot(hidden, output);
    if positive {
        (sigmoid(score) - T::one(), softplus(-score))
    } else {
        (sigmoid(score), softplus(score))
    }
}

/// One SGD step on an output row.
///
/// Adds `∂loss/∂h` (taken before the row moves) to `grad_hidden`, moves the
/// row by `-lr·∂loss/∂o` and returns the loss term.
pub fn apply_output_term<T: Float>(hidden: &[T], output: &mut [T], positive: bool, lr: T, grad_hidden: &mut [T]) -> T {
    let (g, loss) = sgns_coefficient(hidden, output, positive);
    for ((gh, o), &h) in grad_hidden.iter_mut().zip(output.iter_mut()).zip(hidden) {
        *gh = *gh + g * *o;
        *o = *o - lr * g * h;
    }
    loss
}

/// Mean of the given rows.
pub fn mean_rows<T: Float>(rows: &[&[T]], out: &mut [T]) {
    out.iter_mut().for_each(|x| *x = T::zero());
    for row in rows {
        for (o, &r) in out.iter_mut().zip(row.iter()) {
            *o = *o + r;
        }
    }
    let n = T::from(rows.len()).expect("row count fits the float type");
    out.iter_mut().for_each(|x| *x = *x / n);
}

/// Analytic gradients of the full objective for one (target, context, negatives) triple.
#[derive(Clone, Debug)]
pub struct TripleGradient<T> {
    pub loss: T,
    /// One gradient per input row, in the order the rows were given.
    pub input_rows: Vec<Vec<T>>,
    pub positive: Vec<T>,
    pub negatives: Vec<Vec<T>>,
}

pub fn triple_gradient<T: Float>(input_rows: &[&[T]], positive: &[T], negatives: &[&[T]]) -> TripleGradient<T> {
    let dim = positive.len();
    let mut hidden = vec![T::zero(); dim];
    mean_rows(input_rows, &mut hidden);

    let mut grad_hidden = vec![T::zero(); dim];
    let mut loss = T::zero();
    let mut output_grad = |row: &[T], label: bool| {
        let (g, l) = sgns_coefficient(&hidden, row, label);
        loss = loss + l;
        for (gh, &o) in grad_hidden.iter_mut().zip(row) {
            *gh = *gh + g * o;
        }
        hidden.iter().map(|&h| g * h).collect::<Vec<T>>()
    };
    let positive = output_grad(positive, true);
    let negatives = negatives.iter().map(|n| output_grad(n, false)).collect();

    let n = T::from(input_rows.len()).expect("row count fits the float type");
    let per_row: Vec<T> = grad_hidden.iter().map(|&g| g / n).collect();
    TripleGradient {
        loss,
        input_rows: vec![per_row; input_rows.len()],
        positive,
        negatives,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0f64), 0.5);
        assert!(sigmoid(-1000.0f64) >= 0.0);
        assert_eq!(sigmoid(1000.0f64), 1.0);
        assert!((sigmoid(2.0f64) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
        assert!(softplus(1000.0f32).is_finite());
        assert!((softplus(0.0f64) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn output_step_matches_gradient() {
        let rows: [&[f64]; 2] = [&[0.1, -0.2, 0.3], &[0.05, 0.4, -0.1]];
        let pos = [0.2, 0.1, -0.3];
        let neg = [-0.4, 0.2, 0.1];
        let grad = triple_gradient(&rows, &pos, &[&neg]);

        let mut hidden = [0.0; 3];
        mean_rows(&rows, &mut hidden);
        let lr = 0.01;
        let mut gh = [0.0; 3];
        let mut p = pos;
        let mut n = neg;
        let loss = apply_output_term(&hidden, &mut p, true, lr, &mut gh)
            + apply_output_term(&hidden, &mut n, false, lr, &mut gh);
        assert!((loss - grad.loss).abs() < 1e-15);
        for i in 0..3 {
            assert!((p[i] - (pos[i] - lr * grad.positive[i])).abs() < 1e-15);
            assert!((n[i] - (neg[i] - lr * grad.negatives[0][i])).abs() < 1e-15);
            assert!((gh[i] / 2.0 - grad.input_rows[0][i]).abs() < 1e-15);
        }
    }
}
