use super::*;
use crate::nets::random_shift;
use proptest::prelude::*;

fn q(n: i64, e: u32) -> DyadicRational {
    DyadicRational::from_parts(n, e)
}

fn grid_point(units: &[u64], k: u32) -> Vec<DyadicRational> {
    units.iter().map(|&u| q(u as i64, k)).collect()
}

fn vdc(s: u32) -> GeneratorSet {
    GeneratorSet::van_der_corput(s).unwrap()
}

/// Brute-force counter with cross-multiplied integer comparisons.
fn naive_discrepancy(points: &PointSet, y_num: &[u64], y_den: u64) -> (i128, i128) {
    // returns (numerator, denominator) of count − N Π y
    let den = points.denominator() as i128;
    let mut count = 0i128;
    for i in 0..points.len() {
        let x = points.numerators(i);
        let mut inside = true;
        for j in 0..x.len() {
            if (x[j] as i128) * (y_den as i128) >= (y_num[j] as i128) * den {
                inside = false;
            }
        }
        if inside {
            count += 1;
        }
    }
    let vol_den = (y_den as i128).pow(y_num.len() as u32);
    let vol_num: i128 = y_num.iter().map(|&v| v as i128).product();
    (count * vol_den - points.len() as i128 * vol_num, vol_den)
}

#[test]
fn discrepancy_trivial_boxes() {
    let g = GeneratorSet::sobol(3, 5).unwrap();
    let pts = g.net_points(None).unwrap();
    let ones = vec![DyadicRational::one(); 3];
    assert!(discrepancy_exact(&pts, &ones).unwrap().is_zero());
    let flat = vec![q(1, 1), DyadicRational::zero(), q(3, 2)];
    assert!(discrepancy_exact(&pts, &flat).unwrap().is_zero());
    assert!(discrepancy_exact(&pts, &[q(3, 1), q(1, 1), q(1, 1)]).is_err());
    assert!(discrepancy_exact(&pts, &[q(1, 1)]).is_err());
}

#[test]
fn discrepancy_matches_naive_counter() {
    for (n, s, seed) in [(2usize, 4u32, 1u64), (3, 3, 2), (1, 5, 3)] {
        let g = GeneratorSet::sobol(n, s).unwrap();
        let t = random_shift(n, s, seed);
        let pts = g.net_points(Some(&t)).unwrap();
        let ctx = DiscrepancyContext::new(g, Some(t)).unwrap();
        let k = s + 1;
        for y in GridIter::new(n, k) {
            let (num, den) = naive_discrepancy(&pts, &y, 1 << k);
            let expect = DyadicRational::new(BigInt::from(num), n as u32 * k);
            assert_eq!(den, 1i128 << (n as u32 * k));
            let yr = grid_point(&y, k);
            assert_eq!(discrepancy_exact(&pts, &yr).unwrap(), expect);
            assert_eq!(ctx.discrepancy(&yr).unwrap(), expect);
        }
    }
}

#[test]
fn discrepancy_of_rescaled_sets() {
    let g = GeneratorSet::sobol(2, 5).unwrap();
    let r = crate::nets::rescale_to_count(&g, 20, None).unwrap();
    for y in GridIter::new(2, 4) {
        let (num, _) = naive_discrepancy(&r.points, &y, 16);
        let expect = DyadicRational::new(BigInt::from(num), 8);
        assert_eq!(discrepancy_exact(&r.points, &grid_point(&y, 4)).unwrap(), expect);
        let yf: Vec<f64> = y.iter().map(|&v| v as f64 / 16.0).collect();
        assert!((discrepancy_f64(&r.points, &yf) - expect.to_f64()).abs() < 1e-9);
    }
}

#[test]
fn fine_scaled_matches_rational() {
    for k in [6u32, 8] {
        for ell in 0..64u64 {
            for u in 0..=(1u64 << k) {
                let exact = fine_coefficient(ell, &q(u as i64, k)).unwrap();
                assert_eq!(q(fine_scaled(ell, u, k), k), exact, "ℓ={ell} y={u}/2^{k}");
            }
        }
    }
}

#[test]
fn trivial_net_has_vanishing_approximation() {
    // n = 1: the net is all of Q(2^s) and the dual is {0}
    let g = GeneratorSet::sobol(1, 4).unwrap();
    let ctx = DiscrepancyContext::new(g, Some(random_shift(1, 4, 3))).unwrap();
    assert_eq!(ctx.dual().dim(), 0);
    assert_eq!(ctx.quality().dual_rt_weight, None);
    for y in GridIter::new(1, 6) {
        let yr = grid_point(&y, 6);
        assert!(ctx.m_dual_sum(&yr).unwrap().is_zero());
        assert!(ctx.m_direct(&yr).unwrap().is_zero());
    }
    let gap = approximation_gap_grid(&ctx, 6).unwrap();
    assert!(gap.max_gap <= 2.0);
    assert_eq!(gap.bound, 1);
    assert!(gap.within_bound());
}

#[test]
fn approximation_vanishes_at_origin_without_shift() {
    for g in [vdc(3), GeneratorSet::sobol(3, 3).unwrap()] {
        let n = g.dim();
        let ctx = DiscrepancyContext::new(g, None).unwrap();
        let zero = vec![DyadicRational::zero(); n];
        assert!(ctx.m_dual_sum(&zero).unwrap().is_zero());
        assert!(ctx.m_direct(&zero).unwrap().is_zero());
    }
}

#[test]
fn routes_agree_on_grids() {
    let mut cases: Vec<(GeneratorSet, u64)> = (1..=4).map(|s| (vdc(s), s as u64)).collect();
    for s in 1..=3 {
        cases.push((GeneratorSet::sobol(3, s).unwrap(), 10 + s as u64));
    }
    for (g, seed) in cases {
        let (n, s) = (g.dim(), g.resolution());
        for shift in [None, Some(random_shift(n, s, seed))] {
            let ctx = DiscrepancyContext::new(g.clone(), shift).unwrap();
            for k in [s, s + 1] {
                for y in GridIter::new(n, k) {
                    assert_eq!(
                        ctx.m_dual_sum_units(&y, k).unwrap(),
                        ctx.m_direct_units(&y, k),
                        "Y = {y:?}/2^{k}"
                    );
                }
            }
        }
    }
}

#[test]
fn rational_and_scaled_paths_agree() {
    let g = GeneratorSet::sobol(2, 3).unwrap();
    let ctx = DiscrepancyContext::new(g, Some(random_shift(2, 3, 8))).unwrap();
    for y in GridIter::new(2, 4) {
        let yr = grid_point(&y, 4);
        let scaled = ctx.m_direct(&yr).unwrap();
        assert_eq!(ctx.m_direct_rational(&yr), scaled);
        assert_eq!(ctx.m_dual_sum_rational(&yr).unwrap(), scaled);
        assert_eq!(ctx.m_dual_sum(&yr).unwrap(), scaled);
    }
    // off-grid input with a long expansion goes through the rational path
    let y = vec![q(0x1234_5678_9abc_def1, 63), q(5, 3)];
    assert_eq!(ctx.m_direct(&y).unwrap(), ctx.m_dual_sum(&y).unwrap());
}

#[test]
fn truncated_kernel_is_the_indicator_on_the_net_grid() {
    // on Q^n(2^s) every cell is either inside [0, Y) or outside
    let g = GeneratorSet::sobol(3, 3).unwrap();
    let ctx = DiscrepancyContext::new(g, Some(random_shift(3, 3, 4))).unwrap();
    for y in GridIter::new(3, 3) {
        assert_eq!(ctx.m_direct_units(&y, 3), ctx.discrepancy_units(&y, 3));
    }
}

#[test]
fn dual_route_unavailable_beyond_cap() {
    let g = GeneratorSet::sobol(3, 4).unwrap();
    let ctx = DiscrepancyContext::with_cap(g, None, 4).unwrap();
    assert!(!ctx.has_dual_enumeration());
    let y = vec![q(1, 1); 3];
    assert!(matches!(ctx.m_dual_sum(&y), Err(Error::RouteUnavailable(_))));
    assert!(ctx.m_direct(&y).is_ok());
}

#[test]
fn gap_bound_on_van_der_corput() {
    for s in 1..=4u32 {
        for seed in 0..3u64 {
            let ctx = DiscrepancyContext::new(vdc(s), Some(random_shift(2, s, seed))).unwrap();
            let gap = approximation_gap_grid(&ctx, s + 2).unwrap();
            assert_eq!(gap.bound, 2);
            assert!(gap.within_bound(), "s={s} gap={}", gap.max_gap);
            assert_eq!(gap.evaluated, 1 << (2 * (s + 2)));
        }
    }
}

#[test]
fn gap_bound_on_sobol() {
    for (n, s) in [(3usize, 3u32), (4, 3)] {
        let g = GeneratorSet::sobol(n, s).unwrap();
        let ctx = DiscrepancyContext::new(g, Some(random_shift(n, s, 5))).unwrap();
        let gap = approximation_gap_grid(&ctx, s + 1).unwrap();
        assert!(gap.within_bound(), "n={n} s={s}");
    }
}

#[test]
fn lambda_groups_partition_the_dual() {
    let ctx = DiscrepancyContext::new(vdc(3), None).unwrap();
    let total: usize = ctx.profiles().unwrap().iter().map(|(_, c)| c).sum();
    assert_eq!(total + 1, 1 << ctx.dual().dim());
    for (profile, count) in ctx.profiles().unwrap() {
        let g = ctx.lambda_group(&profile).unwrap();
        assert_eq!(g.members.len(), count);
        assert!(g.members.iter().all(|l| rho_profile(l) == profile));
    }
    assert!(ctx.lambda_group(&[4, 0]).is_err());
    assert!(ctx.lambda_group(&[1]).is_err());
}

#[test]
fn lambda_zero_is_a_translate_of_the_group() {
    for g in [vdc(4), GeneratorSet::sobol(2, 4).unwrap(), GeneratorSet::sobol(3, 3).unwrap()] {
        let ctx = DiscrepancyContext::new(g, None).unwrap();
        for (profile, _) in ctx.profiles().unwrap() {
            let grp = ctx.lambda_group(&profile).unwrap();
            assert_eq!(grp.lambda0_count(), 1 << grp.lambda0_dim);
            assert_eq!(grp.lambda0_count(), grp.members.len());
            let rep = grp.representative.clone().unwrap();
            let mut moved: Vec<Vec<u64>> = grp
                .members
                .iter()
                .map(|l| l.iter().zip(&rep).map(|(a, b)| a ^ b).collect())
                .collect();
            moved.sort();
            assert_eq!(moved, grp.lambda0);
            assert!(grp.within_bound(), "{profile:?}");
        }
    }
}

#[test]
fn empty_groups_have_no_representative() {
    let ctx = DiscrepancyContext::new(vdc(3), None).unwrap();
    // vdC dual weights are at least s + 1 = 4
    let grp = ctx.lambda_group(&[1, 1]).unwrap();
    assert!(grp.members.is_empty());
    assert!(matches!(
        ctx.delta_indicator(&grp, &[q(1, 1), q(1, 1)]),
        Err(Error::EmptyGroup(_))
    ));
}

#[test]
fn delta_indicator_identities() {
    for s in 2..=4u32 {
        for g in [vdc(s), GeneratorSet::sobol(2, s).unwrap()] {
            let ctx = DiscrepancyContext::new(g, None).unwrap();
            for (profile, _) in ctx.profiles().unwrap() {
                let grp = ctx.lambda_group(&profile).unwrap();
                let card = grp.lambda0_count() as i64;
                let zero = vec![DyadicRational::zero(); 2];
                assert_eq!(ctx.delta_indicator(&grp, &zero).unwrap(), card);
                let mut total = 0i64;
                for y in GridIter::new(2, s) {
                    let d = ctx.delta_indicator(&grp, &grid_point(&y, s)).unwrap();
                    assert!(d == 0 || d == card);
                    total += d;
                }
                assert_eq!(total, 1 << (2 * s), "mean of δ must be 1");
            }
        }
    }
}

#[test]
fn delta_indicator_truncates_extra_digits() {
    let ctx = DiscrepancyContext::new(vdc(3), None).unwrap();
    let (profile, _) = ctx.profiles().unwrap()[0].clone();
    let grp = ctx.lambda_group(&profile).unwrap();
    for y in GridIter::new(2, 5) {
        let fine = ctx.delta_indicator(&grp, &grid_point(&y, 5)).unwrap();
        let coarse: Vec<u64> = y.iter().map(|v| v >> 2).collect();
        assert_eq!(fine, ctx.delta_indicator(&grp, &grid_point(&coarse, 3)).unwrap());
    }
}

#[test]
fn poisson_summation_on_nets() {
    for g in [vdc(3), vdc(4), GeneratorSet::sobol(3, 3).unwrap(), GeneratorSet::sobol(2, 4).unwrap()] {
        let net = g.as_subspace();
        let report = poisson_summation_check(&net, &net.dual()).unwrap();
        assert!(report.passed());
        assert_eq!(report.checked, 1 << (g.dim() as u32 * g.resolution()));
        assert!(dual_poisson_check(&net).unwrap().passed());
    }
}

#[test]
fn corrupted_dual_yields_witness() {
    let net = vdc(3).as_subspace();
    let dual = net.dual();
    let amb = dual.ambient();
    let mut basis = dual.basis_packed().to_vec();
    basis[0] ^= 1;
    let corrupted = F2Subspace::span_packed(amb, basis);
    assert_ne!(corrupted, dual);
    let report = poisson_summation_check(&net, &corrupted).unwrap();
    let w = report.witness.expect("corruption must be detected");
    assert_ne!(w.sum, w.expected);
}

#[test]
fn decoupling_is_exact() {
    let ctx = DiscrepancyContext::new(vdc(3), Some(random_shift(2, 3, 1))).unwrap();
    for z in GridIter::new(2, 4).step_by(7) {
        assert!(decoupling_check(&ctx, &z, 4));
    }
}

#[test]
fn evaluate_tags_routes() {
    let ctx = DiscrepancyContext::new(vdc(2), None).unwrap();
    let y = vec![q(1, 1), q(3, 2)];
    let a = ctx.evaluate(Route::Direct, &y).unwrap();
    let b = ctx.evaluate(Route::DualSum, &y).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(b.route, Route::DualSum);
    assert!(ctx.evaluate(Route::PointCount, &y).is_ok());
}

proptest! {
    #[test]
    fn routes_agree_off_grid(a in 0u64..1 << 20, b in 0u64..1 << 20, seed in 0u64..50) {
        let ctx = DiscrepancyContext::new(vdc(4), Some(random_shift(2, 4, seed))).unwrap();
        let y = vec![q(a as i64, 20), q(b as i64, 20)];
        prop_assert_eq!(ctx.m_direct(&y).unwrap(), ctx.m_dual_sum(&y).unwrap());
    }
}
