use std::collections::BTreeMap;

use cosetlab::gf2::Gf2Vector;
use cosetlab::oracle::Seed;
use cosetlab::oss::{self, forgery_game, measure_then_rotate_win_probability, HonestSigner, MeasureThenRotate, OssOracles, OssParams};
use cosetlab::pfc::{self, commit, Basis, Opening, PfcParams};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn all_vectors(k: usize) -> impl Iterator<Item = Gf2Vector> {
    (0..1u64 << k).map(move |b| Gf2Vector::truncated(k, b))
}

fn random_qubit(rng: &mut ChaCha20Rng) -> [Complex64; 2] {
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    [Complex64::new((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)]
}

fn tv(a: &BTreeMap<Option<bool>, f64>, b: &BTreeMap<Option<bool>, f64>) -> f64 {
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    0.5 * keys.into_iter().map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

#[test]
fn oracle_structure_by_exhaustion() {
    // Every label's preimage set under P is S_y, P^-1 inverts P, and D
    // answers membership in the dual of S_y's linear part.
    for (params, seed) in [(OssParams::DESK, 1), (OssParams::new(6, 2).unwrap(), 2), (OssParams::new(6, 3).unwrap(), 3)] {
        let o = OssOracles::setup(params, Seed::from_u64(seed)).unwrap();
        let mut images: BTreeMap<u64, Vec<Gf2Vector>> = BTreeMap::new();
        for x in 0..1u64 << params.n {
            let (y, u) = o.p(x).unwrap();
            assert_eq!(o.p_inv(y, &u), Some(x));
            images.entry(y).or_default().push(u);
        }
        assert_eq!(images.len(), 1 << params.r);
        for (y, mut us) in images {
            us.sort();
            let members = o.coset(y).members().unwrap();
            assert_eq!(us, members, "y={y}");
            let diffs: Vec<_> = members.iter().map(|m| *m ^ members[0]).collect();
            for v in all_vectors(params.k()) {
                assert_eq!(o.d(y, &v), diffs.iter().all(|w| !v.dot(w)));
                if !members.contains(&v) {
                    assert_eq!(o.p_inv(y, &v), None);
                }
            }
            let firsts: Vec<bool> = members.iter().map(|m| m.first()).collect();
            assert_eq!(o.is_balanced(y), firsts.contains(&true) && firsts.contains(&false));
        }
    }
}

#[test]
fn honest_signatures_always_verify() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for i in 0..300u64 {
        let o = OssOracles::setup(OssParams::DESK, Seed::from_u64(1000 + i)).unwrap();
        let token = oss::gen(&o, &mut rng).unwrap();
        let vk = token.vk();
        let m: bool = rng.gen();
        let sig = oss::sign(&o, token, m, &mut rng).unwrap().signature().expect("balanced token");
        assert!(oss::verify(&o, vk, m, &sig));
        assert!(!oss::verify(&o, vk, !m, &sig));
        assert!(!oss::verify(&o, vk ^ 1, m, &sig) || o.coset(vk ^ 1).contains(&sig));
        assert!(!forgery_game(o.clone(), &mut HonestSigner, &mut rng));
    }
}

#[test]
fn cloner_win_probability_closed_form() {
    // H.Phase.H on |u0> puts amplitude 2/|S| on every other element of S_y,
    // so the naive cloner wins with 4 (|S| - 1) / |S|^2 for every label.
    for (params, seed) in [(OssParams::DESK, 5), (OssParams::new(6, 2).unwrap(), 6), (OssParams::new(7, 4).unwrap(), 7)] {
        let o = OssOracles::setup(params, Seed::from_u64(seed)).unwrap();
        let size = (1u64 << params.coset_dim()) as f64;
        let want = 4.0 * (size - 1.0) / (size * size);
        for y in 0..1u64 << params.r {
            let got = measure_then_rotate_win_probability(&o, y).unwrap();
            assert!((got - want).abs() < 1e-12, "{params:?} y={y}: {got} vs {want}");
        }
    }
    // Frozen: |S| = 32.
    let o = OssOracles::setup(OssParams::DESK, Seed::from_u64(8)).unwrap();
    assert!((measure_then_rotate_win_probability(&o, 0).unwrap() - 0.12109375).abs() < 1e-12);
}

#[test]
fn cloner_empirical_rate() {
    let o = OssOracles::setup(OssParams::new(6, 2).unwrap(), Seed::from_u64(9)).unwrap();
    let p = 4.0 * 15.0 / 256.0;
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let trials = 5000;
    let wins = (0..trials).filter(|_| forgery_game(o.clone(), &mut MeasureThenRotate, &mut rng)).count();
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    assert!((wins as f64 / trials as f64 - p).abs() <= 3.0 * se, "{wins}/{trials} vs {p}");
}

/// Decoded-bit distribution pushed forward through `dec` over an exact
/// outcome distribution.
fn pushforward(dist: &BTreeMap<(bool, Gf2Vector), f64>, dec: impl Fn(bool, Gf2Vector) -> Option<bool>) -> BTreeMap<Option<bool>, f64> {
    let mut m = BTreeMap::new();
    for (&(b, u), &p) in dist {
        *m.entry(dec(b, u)).or_insert(0.0) += p;
    }
    m
}

#[test]
fn decoding_reproduces_direct_measurement() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for i in 0..24u64 {
        let (ck, dk) = pfc::gen(PfcParams::DESK, &Seed::from_u64(100 + i)).unwrap();
        let amps = random_qubit(&mut rng);
        let committed = commit(&ck, amps, &mut rng).unwrap();
        let c = committed.commitment();
        let st = committed.state();
        let z = pushforward(&st.z_open_distribution().unwrap(), |bit, u| dk.dec_z(&c, &Opening { basis: Basis::Z, bit, u }));
        let x = pushforward(&st.x_open_distribution().unwrap(), |bit, u| dk.dec_x(&c, &Opening { basis: Basis::X, bit, u }));
        let direct_z = BTreeMap::from([(Some(false), amps[0].norm_sqr()), (Some(true), amps[1].norm_sqr())]);
        let direct_x = BTreeMap::from([(Some(false), (amps[0] + amps[1]).norm_sqr() / 2.0), (Some(true), (amps[0] - amps[1]).norm_sqr() / 2.0)]);
        assert!(tv(&z, &direct_z) < 1e-12, "Z, key {i}: {z:?}");
        assert!(tv(&x, &direct_x) < 1e-12, "X, key {i}: {x:?}");
    }
}

#[test]
fn commitment_and_decoding_keys_agree() {
    let (ck, dk) = pfc::gen(PfcParams::SMALL, &Seed::from_u64(12)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    let c = pfc::commit_bit(&ck, true, &mut rng).unwrap().commitment();
    let k = PfcParams::SMALL.inner.k();
    for u in all_vectors(k) {
        for bit in [false, true] {
            let z = Opening { basis: Basis::Z, bit, u };
            let x = Opening { basis: Basis::X, bit, u };
            assert_eq!(ck.dec_z(&c, &z), dk.dec_z(&c, &z));
            assert_eq!(ck.dec_x(&c, &x), dk.dec_x(&c, &x));
        }
    }
    // The Z opening sets are exactly the two slices of the inner coset.
    let s = ck.inner_coset(c.vk, c.vk_bar);
    for b in [false, true] {
        let want: Vec<_> = s.members().unwrap().into_iter().filter(|u| u.first() == b).collect();
        let got: Vec<_> = all_vectors(k).filter(|&u| dk.dec_z(&c, &Opening { basis: Basis::Z, bit: b, u }) == Some(b)).collect();
        assert_eq!(got, want);
        assert_eq!(dk.opening_set(&c, b).unwrap().members().unwrap(), want);
    }
}

#[test]
fn forged_commitments_decode_to_bottom() {
    let (ck, dk) = pfc::gen(PfcParams::DESK, &Seed::from_u64(14)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(15);
    let committed = pfc::commit_bit(&ck, false, &mut rng).unwrap();
    let c = committed.commitment();
    let d = committed.open_z(&mut rng);
    assert_eq!(dk.dec_z(&c, &d), Some(false));
    // A changed outer signature decodes only if it is still a signature of 1,
    // i.e. lies in the outer coset with a leading 1.
    let outer = ck.outer().coset(c.vk);
    let mut rejected = 0;
    for sig in all_vectors(c.sig.len()) {
        let bad = pfc::Commitment { sig, ..c };
        let valid = sig.first() && outer.contains(&sig);
        assert_eq!(dk.dec_z(&bad, &d).is_some(), valid, "{sig}");
        rejected += !valid as usize;
    }
    assert_eq!(rejected, (1 << c.sig.len()) - outer.cardinality() as usize / 2);
    // A signature on 0 rather than 1 is not a commitment.
    let mut zero = c;
    zero.sig.set(0, false);
    assert_eq!(dk.dec_x(&zero, &Opening { basis: Basis::X, ..d }), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_openings_match_committed_bit(seed: u64, b: bool) {
        let (ck, dk) = pfc::gen(PfcParams::DESK, &Seed::from_u64(seed)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 1);
        let z = pfc::commit_bit(&ck, b, &mut rng).unwrap();
        let c = z.commitment();
        prop_assert_eq!(dk.dec_z(&c, &z.open_z(&mut rng)), Some(b));
        // An X opening of |+> or |-> decodes deterministically.
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let amps = if b { [h, -h] } else { [h, h] };
        let x = commit(&ck, amps, &mut rng).unwrap();
        let c = x.commitment();
        prop_assert_eq!(dk.dec_x(&c, &x.open_x(&mut rng)), Some(b));
    }
}
