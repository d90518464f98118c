//! Deterministic random draws for property checks and quasi-random sample points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{Chart, Coordinate};
use crate::expr::{BinOp, Expr, Func, ScalarField};
use crate::forms::FormField;

/// Independent stream for trial `trial` under a master seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn coord_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{}", i + 1)).collect()
}

fn var(i: usize) -> Expr {
    Expr::var(i, format!("x{}", i + 1))
}

fn coef(rng: &mut impl Rng) -> f64 {
    rng.gen_range(-1.0..=1.0)
}

fn monomial(exps: &[usize]) -> Option<Expr> {
    exps.iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { var(i) } else { Expr::bin(BinOp::Pow, var(i), Expr::int(e as i64)) })
        .reduce(|a, b| Expr::bin(BinOp::Mul, a, b))
}

fn exponents(n: usize, max_degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                let used: usize = prefix.iter().sum();
                (0..=max_degree - used).map(move |e| {
                    let mut p = prefix.clone();
                    p.push(e);
                    p
                })
            })
            .collect();
    }
    out
}

/// Polynomial of total degree `<= degree` in `n` variables, every coefficient uniform in `[-1, 1]`.
pub fn random_polynomial(rng: &mut impl Rng, n: usize, degree: usize) -> Expr {
    exponents(n, degree)
        .into_iter()
        .map(|e| {
            let c = Expr::float(coef(rng));
            match monomial(&e) {
                Some(m) => Expr::bin(BinOp::Mul, c, m),
                None => c,
            }
        })
        .reduce(|a, b| Expr::bin(BinOp::Add, a, b))
        .expect("at least the constant term")
}

pub fn random_scalar(rng: &mut impl Rng, n: usize) -> ScalarField {
    ScalarField::new(random_polynomial(rng, n, 3), n)
}

/// Form with a random cubic coefficient in every slot of the listed degrees.
pub fn random_form(rng: &mut impl Rng, n: usize, degrees: &[usize]) -> FormField {
    let mut terms = Vec::new();
    for mask in 0usize..1 << n {
        if degrees.contains(&(mask.count_ones() as usize)) {
            let idx = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            terms.push((idx, random_scalar(rng, n)));
        }
    }
    FormField::from_terms(n, terms).expect("indices fit the dimension")
}

/// Random smooth metric on `n` unbounded coordinates `x1..xn`, positive definite on
/// `[-1, 1]^n`: diagonal entries lie in `[1.1, 1.9]` and each off-diagonal entry is
/// bounded by `0.3 / (n - 1)`, so the matrix stays strictly diagonally dominant.
pub fn random_chart(rng: &mut impl Rng, n: usize) -> Chart {
    let mut m = vec![vec![Expr::int(0); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        let k = rng.gen_range(0..n);
        let l = rng.gen_range(0..n);
        let a = rng.gen_range(0.5..1.5);
        let b = coef(rng);
        let arg = Expr::bin(BinOp::Add, Expr::bin(BinOp::Mul, Expr::float(a), var(k)), Expr::float(b));
        let wave = Expr::bin(BinOp::Mul, Expr::float(0.3), Expr::call(Func::Sin, arg));
        let bump = Expr::bin(
            BinOp::Mul,
            Expr::float(0.1 * coef(rng)),
            Expr::bin(BinOp::Pow, var(l), Expr::int(2)),
        );
        row[i] = Expr::bin(BinOp::Add, Expr::bin(BinOp::Add, Expr::float(1.5), wave), bump);
    }
    if n > 1 {
        let eps = 0.1 / (n - 1) as f64;
        for i in 0..n {
            for j in i + 1..n {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                let poly = Expr::bin(
                    BinOp::Add,
                    Expr::bin(BinOp::Add, Expr::float(coef(rng)), Expr::bin(BinOp::Mul, Expr::float(coef(rng)), var(a))),
                    Expr::bin(BinOp::Mul, Expr::float(coef(rng)), Expr::bin(BinOp::Mul, var(b), var(c))),
                );
                let e = Expr::bin(BinOp::Mul, Expr::float(eps), poly);
                m[i][j] = e.clone();
                m[j][i] = e;
            }
        }
    }
    let coords = coord_names(n).into_iter().map(Coordinate::unbounded).collect();
    Chart::new(coords, m).expect("random chart is well formed")
}

pub fn random_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| coef(rng)).collect()
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// First `count` Halton points mapped affinely into `bounds` (index 0 skipped).
pub fn halton(bounds: &[(f64, f64)], count: usize) -> Vec<Vec<f64>> {
    assert!(bounds.len() <= PRIMES.len());
    (1..=count as u64)
        .map(|i| {
            bounds
                .iter()
                .zip(PRIMES)
                .map(|(&(lo, hi), p)| lo + (hi - lo) * radical_inverse(i, p))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_base_two() {
        let pts = halton(&[(0.0, 1.0)], 4);
        assert_eq!(pts, vec![vec![0.5], vec![0.25], vec![0.75], vec![0.125]]);
    }

    #[test]
    fn cubic_has_all_monomials() {
        assert_eq!(exponents(3, 3).len(), 20);
        assert_eq!(exponents(1, 3).len(), 4);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = trial_rng(42, 3).gen();
        let b: f64 = trial_rng(42, 3).gen();
        let c: f64 = trial_rng(42, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_charts_are_positive_definite() {
        for t in 0..40 {
            let mut rng = trial_rng(7, t);
            let n = 1 + (t as usize % 4);
            let chart = random_chart(&mut rng, n);
            let pts: Vec<Vec<f64>> = (0..5).map(|_| random_point(&mut rng, n)).collect();
            chart.validate_metric(&pts).unwrap();
        }
    }
}
