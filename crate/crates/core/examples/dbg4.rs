use sfkit_core::algebra::*;
use sfkit_core::models;
use sfkit_core::spectral;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use nalgebra::DMatrix;

fn main() {
    let alg = WeightedBlockAlgebra::new(vec![5, 3], vec![1.0, std::f64::consts::SQRT_2]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    for _ in 0..4 { models::nearby_projection_pair(&alg, &mut rng, 0.5); }
    let (p, q) = models::nearby_projection_pair(&alg, &mut rng, 0.5);
    let one = BlockOperator::identity(&alg);
    let s = q.op().scale(2.0).sub(&one).add(&p.op().scale(2.0).sub(&one));
    let blk = s.block(1);
    let n = blk.nrows();
    // real doubling
    let mut m = DMatrix::<f64>::zeros(2*n, 2*n);
    for i in 0..n {
        for j in 0..n {
            let z = blk[(i,j)];
            m[(i,j)] = z.re;
            m[(i+n,j+n)] = z.re;
            m[(i,j+n)] = -z.im;
            m[(i+n,j)] = z.im;
        }
    }
    let se = nalgebra::linalg::SymmetricEigen::new(m.clone());
    let recon = &se.eigenvectors * DMatrix::from_diagonal(&se.eigenvalues) * se.eigenvectors.transpose();
    println!("doubled real recon: {:.3e}", (&recon - &m).norm());
    println!("doubled eigenvalues: {:?}", {
        let mut v: Vec<f64> = se.eigenvalues.iter().copied().collect();
        v.sort_by(|a,b| a.partial_cmp(b).unwrap());
        v
    });
}
