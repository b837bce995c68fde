use std::collections::BTreeSet;

use cosetlab::gf2::{all_subspaces, coset_representatives, gaussian_binomial, sample_subspace, solve_affine, Gf2Coset, Gf2Matrix, Gf2Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn vec_of(n: usize, bits: u64) -> Gf2Vector {
    Gf2Vector::new(n, bits).unwrap()
}

fn all_vectors(n: usize) -> impl Iterator<Item = Gf2Vector> {
    (0..1u64 << n).map(move |b| vec_of(n, b))
}

/// Entry-by-entry product, independent of the packed row arithmetic.
fn naive_mul(a: &Gf2Matrix, x: &Gf2Vector) -> Gf2Vector {
    let coords: Vec<bool> = (0..a.rows()).map(|i| (0..a.cols()).fold(false, |acc, j| acc ^ (a.get(i, j) & x.get(j)))).collect();
    Gf2Vector::from_bools(&coords).unwrap()
}

/// Closure of a generator list under addition.
fn naive_span(n: usize, gens: &[Gf2Vector]) -> BTreeSet<Gf2Vector> {
    let mut out = BTreeSet::from([Gf2Vector::zero(n)]);
    for g in gens {
        let shifted: Vec<_> = out.iter().map(|v| *v ^ *g).collect();
        out.extend(shifted);
    }
    out
}

fn matrix(rows: usize, cols: usize, seed: u64) -> Gf2Matrix {
    Gf2Matrix::random(rows, cols, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap()
}

fn coset(n: usize, ngens: usize, seed: u64, shift: u64) -> Gf2Coset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let gens: Vec<_> = (0..ngens).map(|_| vec_of(n, rng.gen_range(0..1u64 << n))).collect();
    Gf2Coset::from_generators(n, &gens, vec_of(n, shift & ((1 << n) - 1))).unwrap()
}

proptest! {
    #[test]
    fn product_matches_entrywise(rows in 1usize..10, cols in 1usize..10, seed: u64, x: u64) {
        let a = matrix(rows, cols, seed);
        let x = Gf2Vector::truncated(cols, x);
        prop_assert_eq!(a.mul_vec(&x).unwrap(), naive_mul(&a, &x));
        let v = Gf2Vector::truncated(rows, x.bits());
        prop_assert_eq!(a.left_mul_vec(&v).unwrap(), naive_mul(&a.transpose(), &v));
    }

    #[test]
    fn rank_is_image_dimension(rows in 1usize..8, cols in 1usize..8, seed: u64) {
        let a = matrix(rows, cols, seed);
        let image: BTreeSet<_> = all_vectors(cols).map(|x| a.mul_vec(&x).unwrap()).collect();
        prop_assert_eq!(1usize << a.rank(), image.len());
        prop_assert_eq!(a.rank(), a.transpose().rank());
        let (r, pivots) = a.rref();
        prop_assert_eq!(r.rows(), pivots.len());
        prop_assert_eq!(r.rank(), a.rank());
    }

    #[test]
    fn solve_affine_agrees_with_search(rows in 1usize..7, cols in 1usize..7, seed: u64, b: u64, u: u64) {
        let a = matrix(rows, cols, seed);
        let b = Gf2Vector::truncated(rows, b);
        let u = Gf2Vector::truncated(rows, u);
        let exists = all_vectors(cols).any(|z| a.mul_vec(&z).unwrap() == u ^ b);
        match solve_affine(&a, &b, &u).unwrap() {
            Some(z) => prop_assert_eq!(a.mul_vec(&z).unwrap() ^ b, u),
            None => prop_assert!(!exists),
        }
    }

    #[test]
    fn membership_matches_enumeration(n in 1usize..8, ngens in 0usize..6, seed: u64, shift: u64) {
        let c = coset(n, ngens, seed, shift);
        let gens: Vec<_> = c.basis().to_vec();
        let expect: BTreeSet<_> = naive_span(n, &gens).into_iter().map(|v| v ^ c.shift()).collect();
        let members: BTreeSet<_> = c.members().unwrap().into_iter().collect();
        prop_assert_eq!(&members, &expect);
        prop_assert_eq!(c.cardinality(), expect.len() as u128);
        for v in all_vectors(n) {
            prop_assert_eq!(c.contains(&v), expect.contains(&v));
        }
    }

    #[test]
    fn dual_is_orthogonal_complement(n in 1usize..8, ngens in 0usize..6, seed: u64) {
        let s = coset(n, ngens, seed, 0);
        let d = s.dual().unwrap();
        prop_assert_eq!(s.dim() + d.dim(), n);
        let expect: BTreeSet<_> = all_vectors(n).filter(|v| s.members().unwrap().iter().all(|w| !v.dot(w))).collect();
        prop_assert_eq!(d.members().unwrap().into_iter().collect::<BTreeSet<_>>(), expect);
        prop_assert_eq!(d.dual().unwrap(), s);
    }

    #[test]
    fn canonical_form_is_unique(n in 1usize..8, ngens in 0usize..6, seed: u64, shift: u64, t: u64) {
        let c = coset(n, ngens, seed, shift);
        // Any member works as shift, and any spanning set as generators.
        let member = c.sample(&mut ChaCha20Rng::seed_from_u64(t));
        let mut gens = c.basis().to_vec();
        if gens.len() >= 2 {
            let g1 = gens[1];
            gens[0] ^= g1;
            gens.push(g1 ^ gens[0]);
        }
        let other = Gf2Coset::from_generators(n, &gens, member).unwrap();
        prop_assert_eq!(&other, &c);
        prop_assert_eq!(c.to_text().parse::<Gf2Coset>().unwrap(), c);
    }

    #[test]
    fn representatives_partition_the_ambient(n in 2usize..8, seed: u64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let da = rng.gen_range(1..=n);
        let ambient = sample_subspace(n, da, &mut rng).unwrap();
        let t = cosetlab::gf2::sample_subspace_within(&ambient, rng.gen_range(0..=da), &mut rng).unwrap();
        let reps = coset_representatives(&t, &ambient).unwrap();
        prop_assert_eq!(reps.len(), 1usize << (ambient.dim() - t.dim()));
        let mut covered = BTreeSet::new();
        for r in &reps {
            let members = t.translate(r).unwrap().members().unwrap();
            prop_assert_eq!(members[0], *r);
            for m in members {
                prop_assert!(ambient.contains(&m));
                prop_assert!(covered.insert(m));
            }
        }
        prop_assert_eq!(covered.len() as u128, ambient.cardinality());
    }
}

#[test]
fn subspace_counts_match_brute_force() {
    // Distinct spans of all rank-k generator tuples in GF(2)^n.
    for n in 1..=4usize {
        for k in 0..=n {
            let mut spans = BTreeSet::new();
            let total = 1u64 << (n * k);
            for code in 0..total {
                let gens: Vec<_> = (0..k).map(|i| vec_of(n, (code >> (i * n)) & ((1 << n) - 1))).collect();
                let span = naive_span(n, &gens);
                if span.len() == 1 << k {
                    spans.insert(span.into_iter().collect::<Vec<_>>());
                }
            }
            assert_eq!(gaussian_binomial(n, k), spans.len() as u128, "n={n} k={k}");
            let listed: BTreeSet<_> = all_subspaces(n, k).unwrap().iter().map(|s| s.members().unwrap()).collect();
            assert_eq!(listed, spans, "n={n} k={k}");
        }
    }
    // Frozen values.
    assert_eq!(gaussian_binomial(4, 2), 35);
    assert_eq!(gaussian_binomial(6, 3), 1395);
    assert_eq!(gaussian_binomial(8, 3), 97155);
}

#[test]
fn sampled_subspaces_are_uniform() {
    // 35 subspaces of dimension 2 in GF(2)^4; chi-square over 35 cells.
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let trials = 35_000;
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..trials {
        *counts.entry(sample_subspace(4, 2, &mut rng).unwrap().to_text()).or_insert(0usize) += 1;
    }
    assert_eq!(counts.len(), 35);
    let e = trials as f64 / 35.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // 34 degrees of freedom; the 0.999 quantile is about 65.2.
    assert!(chi2 < 65.2, "chi2 {chi2}");
}
