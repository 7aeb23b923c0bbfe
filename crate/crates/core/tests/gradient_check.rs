//! Finite-difference oracle for the reverse-mode gradients: for every layer
//! kind and every parameter of small random networks, the recorded backward
//! gradient must match a central difference of the same loss.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use taxgan_core::nn::{Activation, Matrix, Network};

const H: f64 = 1e-5;
const MAX_REL_ERR: f64 = 1e-4;

/// Central finite difference of `loss` with respect to parameter `i`.
fn numeric_grad(net: &mut Network, i: usize, loss: &mut dyn FnMut(&Network) -> f64) -> f64 {
    let original = net.get_param(i);
    net.set_param(i, original + H);
    let plus = loss(net);
    net.set_param(i, original - H);
    let minus = loss(net);
    net.set_param(i, original);
    (plus - minus) / (2.0 * H)
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs());
    if denom < 1e-10 {
        return 0.0;
    }
    (analytic - numeric).abs() / denom
}

/// Sum-of-outputs loss; its output gradient is all ones.
fn sum_loss(net: &Network, x: &Matrix) -> f64 {
    net.evaluate(x).unwrap().data().iter().sum()
}

/// LeakyReLU is not differentiable at 0; finite differences are invalid
/// within `H` of the kink, so resample until all pre-activations clear it.
fn pre_activations_clear_kinks(net: &Network, x: &Matrix) -> bool {
    let mut current = x.clone();
    for layer in net.layers() {
        let (z, a) = layer.forward_batch(&current).unwrap();
        if matches!(layer.activation(), Activation::LeakyRelu { .. })
            && z.data().iter().any(|v| v.abs() < 1e-3)
        {
            return false;
        }
        current = a;
    }
    true
}

fn random_input<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

fn check_network(dims: &[usize], hidden: Activation, output: Activation, seed: u64) {
    let mut attempt = 0;
    let (mut net, x) = loop {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt * 1000));
        let net = Network::mlp(dims, hidden, output, &mut rng).unwrap();
        let x = random_input(3, dims[0], &mut rng);
        if pre_activations_clear_kinks(&net, &x) {
            break (net, x);
        }
        attempt += 1;
        assert!(attempt < 50, "could not sample a kink-free configuration");
    };
    assert!(net.param_count() <= 50, "test net too large: {}", net.param_count());

    net.forward(&x).unwrap();
    let rows = x.rows();
    let ones = Matrix::from_vec(rows, dims[dims.len() - 1], vec![1.0; rows * dims[dims.len() - 1]])
        .unwrap();
    net.backward(&ones).unwrap();
    let analytic = net.grads_flat().unwrap();

    for (i, &grad) in analytic.iter().enumerate() {
        let numeric = numeric_grad(&mut net, i, &mut |n| sum_loss(n, &x));
        let err = rel_err(grad, numeric);
        assert!(
            err < MAX_REL_ERR,
            "param {i} of {dims:?} {hidden:?}/{output:?}: analytic {grad} vs numeric {numeric} (rel {err})"
        );
    }
}

#[test]
fn gradients_match_finite_differences_for_every_layer_kind() {
    let leaky = Activation::LeakyRelu { slope: 0.2 };
    for seed in 0..5 {
        check_network(&[4, 5, 3], leaky, Activation::Identity, seed);
        check_network(&[3, 4, 2], Activation::Tanh, Activation::Sigmoid, seed);
        check_network(&[5, 4, 1], Activation::Sigmoid, Activation::Identity, seed);
        check_network(&[2, 6, 2], leaky, Activation::Tanh, seed);
    }
}

#[test]
fn input_gradient_matches_finite_differences() {
    let leaky = Activation::LeakyRelu { slope: 0.2 };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut net = Network::mlp(&[4, 5, 2], leaky, Activation::Tanh, &mut rng).unwrap();
    let x = random_input(1, 4, &mut rng);
    assert!(pre_activations_clear_kinks(&net, &x));

    net.forward(&x).unwrap();
    let ones = Matrix::from_vec(1, 2, vec![1.0, 1.0]).unwrap();
    let input_grad = net.backward(&ones).unwrap();

    for i in 0..4 {
        let mut plus = x.clone();
        plus.set(0, i, x.get(0, i) + H);
        let mut minus = x.clone();
        minus.set(0, i, x.get(0, i) - H);
        let numeric = (sum_loss(&net, &plus) - sum_loss(&net, &minus)) / (2.0 * H);
        let err = rel_err(input_grad.get(0, i), numeric);
        assert!(err < MAX_REL_ERR, "input dim {i}: rel err {err}");
    }
}
