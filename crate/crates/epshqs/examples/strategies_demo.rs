//! The four query strategies, driven by hand on a random teacher.
//! Run with `cargo run --release --example strategies_demo`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use epshqs::design_space::{sample_uniform, DesignSpace, SampleStream};
use epshqs::neural::{Mlp, MlpConfig};
use epshqs::strategies::{
    score_pool, select_dbal, select_eps_hqs, select_random, select_top_b, PoolSource,
};

fn main() -> epshqs::Result<()> {
    // ANCHOR: setup
    let space = DesignSpace::from_bounds(vec![-5.0, 0.0], vec![10.0, 15.0])?;
    let mut stream = SampleStream::new(42);
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // A stand-in teacher; in the loop this is trained on C-labels.
    let teacher = Mlp::init(MlpConfig::teacher_default(space.dim()), &mut rng)?;

    let pool = sample_uniform(&space, 1000, &mut stream);
    let scored = score_pool(&teacher, &space, &pool)?;
    // ANCHOR_END: setup

    // ANCHOR: select
    let b = 10;
    let random = select_random(&PoolSource::Finite(&pool), b, &mut stream)?;
    let top = select_top_b(&scored, b)?;
    let dbal = select_dbal(&scored, &space, b, 10, &mut rng)?;
    let hqs = select_eps_hqs(&teacher, &space, b, 0.5, &mut stream, 500, 20)?;

    println!("random picked ids {:?}", ids(&random.selected));
    println!("top-B picked ids {:?}", ids(&top.selected));
    println!("dbal picked ids {:?}", ids(&dbal.selected));
    println!(
        "eps-hqs picked ids {:?} (quota {}, fallback: {})",
        ids(&hqs.selected),
        hqs.fail_portion_ids.len(),
        hqs.fallback_used
    );
    // ANCHOR_END: select
    Ok(())
}

fn ids(samples: &[epshqs::design_space::Sample]) -> Vec<u64> {
    samples.iter().map(|s| s.id).collect()
}
