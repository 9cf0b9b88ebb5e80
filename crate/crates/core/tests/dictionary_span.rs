mod common;

use common::{linspace, max_lstsq_residual, random_partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splinedict::{sample, Partition, SplineBasis, SplineDictionary};

fn fig1_partition() -> Partition {
    Partition::new(vec![0.0, 0.35, 0.8, 1.55, 2.1, 2.75, 3.4, 4.0]).unwrap()
}

#[test]
fn odd_even_split_of_six_knots() {
    let p = fig1_partition();
    let grid = linspace(0.0, 4.0, 400);
    let subs = p.round_robin(2).unwrap();
    // one subpartition holds the odd-indexed knots, the other the even ones
    assert_eq!(subs[1].interior(), &[0.35, 1.55, 2.75]);
    assert_eq!(subs[0].interior(), &[0.8, 2.1, 3.4]);

    let cubic = SplineDictionary::new(&p, subs.clone(), 4).unwrap();
    assert_eq!(cubic.len(), 14);
    assert_eq!(cubic.span_rank(&grid).unwrap(), 10);

    let linear = SplineDictionary::new(&p, subs, 2).unwrap();
    assert_eq!(linear.len(), 10);
    assert_eq!(linear.span_rank(&grid).unwrap(), 8);
}

#[test]
fn basis_rank_is_full() {
    let p = fig1_partition();
    let grid = linspace(0.0, 4.0, 300);
    for m in 1..=4 {
        let basis = SplineDictionary::basis(&p, m).unwrap();
        assert_eq!(basis.span_rank(&grid).unwrap(), basis.len());
    }
}

#[test]
fn random_dictionaries_span_the_parent_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..30 {
        let n_int = rng.gen_range(2..=12);
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(2..=n_int);
        let p = random_partition(&mut rng, 0.0, 1.0, n_int);
        let dict = SplineDictionary::round_robin(&p, n, m).unwrap();
        let sub_interior: usize = dict.subpartitions().iter().map(Partition::interior_count).sum();
        assert_eq!(dict.len(), n * m + sub_interior);
        assert!(dict.len() > m + n_int);

        let grid = linspace(0.0, 1.0, 10 * (m + n_int) + 50);
        assert_eq!(dict.span_rank(&grid).unwrap(), m + n_int);

        let atoms = sample(&dict, &grid).unwrap();
        let parent = sample(&SplineBasis::new(&p, m).unwrap(), &grid).unwrap();
        assert!(max_lstsq_residual(parent.values(), atoms.values()) <= 1e-8);
        assert!(max_lstsq_residual(atoms.values(), parent.values()) <= 1e-8);
    }
}

#[test]
fn atoms_are_bsplines_of_their_subpartition() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = random_partition(&mut rng, 0.0, 2.0, 9);
    let dict = SplineDictionary::round_robin(&p, 3, 3).unwrap();
    let grid = linspace(0.0, 2.0, 500);
    let s = sample(&dict, &grid).unwrap();
    for (g, atom) in dict.atoms().enumerate() {
        let basis = &dict.bases()[atom.subpartition];
        let (lo, hi) = dict.support(g).unwrap();
        for (r, &x) in grid.iter().enumerate() {
            let v = s.values()[(r, g)];
            assert!(v >= 0.0);
            assert_eq!(v, basis.eval(atom.index, x).unwrap());
            assert_eq!(v, dict.eval(g, x).unwrap());
            if x < lo || x > hi {
                assert_eq!(v, 0.0);
            }
        }
    }
}

#[test]
fn cardinal_dictionary_spans_the_fine_space() {
    let dict = SplineDictionary::cardinal(0.0, 6.0, 0.5, 1.5, 3).unwrap();
    assert_eq!(dict.subpartition_count(), 3);
    assert_eq!(dict.parent(), &Partition::uniform(0.0, 6.0, 0.5).unwrap());
    let grid = linspace(0.0, 6.0, 10 * dict.space_dimension());
    assert_eq!(dict.span_rank(&grid).unwrap(), dict.space_dimension());
}
