use nneda::models::{DaModel, NadeModel};
use nneda::RngStream;
use rand::Rng;

const EPS: f64 = 1e-5;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-8)
}

fn random_batch(rng: &mut RngStream, n: usize, d: usize) -> Vec<Vec<bool>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random()).collect())
        .collect()
}

#[test]
fn nade_gradient_matches_finite_differences() {
    for seed in 0..20 {
        let mut rng = RngStream::new(seed);
        let mut m = NadeModel::new(6, 4, 0.1, &mut rng);
        // move away from the symmetric zero-bias start
        let p: Vec<f64> = m
            .parameters()
            .iter()
            .map(|x| x + rng.random_range(-0.5..0.5))
            .collect();
        m.set_parameters(&p).unwrap();
        let batch = random_batch(&mut rng, 5, 6);
        let (grad, _) = m.gradient(&batch);
        let nll = |m: &NadeModel| m.gradient(&batch).1;
        let mut worst: f64 = 0.0;
        for k in 0..p.len() {
            let mut q = p.clone();
            q[k] = p[k] + EPS;
            m.set_parameters(&q).unwrap();
            let up = nll(&m);
            q[k] = p[k] - EPS;
            m.set_parameters(&q).unwrap();
            let down = nll(&m);
            worst = worst.max(rel_err(grad[k], (up - down) / (2.0 * EPS)));
        }
        assert!(worst < 1e-4, "seed {seed}: {worst}");
    }
}

#[test]
fn da_gradient_matches_finite_differences() {
    for seed in 0..20 {
        let mut rng = RngStream::new(seed);
        let mut m = DaModel::new(8, 4, 0.2, 0.1, &mut rng);
        let p: Vec<f64> = m
            .parameters()
            .iter()
            .map(|x| x + rng.random_range(-0.5..0.5))
            .collect();
        m.set_parameters(&p).unwrap();
        let targets = random_batch(&mut rng, 5, 8);
        let inputs: Vec<Vec<f64>> = targets
            .iter()
            .map(|t| {
                t.iter()
                    .map(|&b| if b ^ rng.random_bool(0.2) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let (grad, _) = m.gradient(&inputs, &targets);
        let mut worst: f64 = 0.0;
        for k in 0..p.len() {
            let mut q = p.clone();
            q[k] = p[k] + EPS;
            m.set_parameters(&q).unwrap();
            let up = m.objective(&inputs, &targets);
            q[k] = p[k] - EPS;
            m.set_parameters(&q).unwrap();
            let down = m.objective(&inputs, &targets);
            worst = worst.max(rel_err(grad[k], (up - down) / (2.0 * EPS)));
        }
        assert!(worst < 1e-4, "seed {seed}: {worst}");
    }
}
