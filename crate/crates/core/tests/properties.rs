use locmf::builders::{plain_measure_family, BinnedMeasure};
use locmf::dyadic::{cube_at, DyadicCube, DyadicFamily, Window};
use locmf::estimators::{auto_h_grid, legendre_points, scaling_function, structure_function, FitPolicy};
use locmf::exec::Exec;
use locmf::numeric::linspace_step;
use locmf::profile::Profile;
use locmf::synth::{simulate, DEFAULT_TRUNCATION};
use locmf::wavelet::{dwt, Filter, WaveletPyramid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pyramid_from(seed_vals: &[f64], j_max: u32) -> WaveletPyramid {
    let mut it = seed_vals.iter().cycle();
    let details = (3..=j_max).map(|j| (0..1usize << j).map(|_| *it.next().unwrap()).collect()).collect();
    WaveletPyramid::from_details(Filter::Db2, 3, details).unwrap()
}

fn cascade(weights: &[f64], depth: u32) -> BinnedMeasure {
    // random multiplicative cascade, multiplier drawn per cube from the pool
    let mut mass = vec![1.0];
    let mut it = weights.iter().cycle();
    for _ in 0..depth {
        mass = mass
            .iter()
            .flat_map(|m| {
                let w = *it.next().unwrap();
                [m * w, m * (1.0 - w)]
            })
            .collect();
    }
    BinnedMeasure::new(mass).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn children_partition_parent(j in 0u32..30, k_frac in 0.0f64..1.0) {
        let k = ((k_frac * DyadicCube::count_at(j) as f64) as u64).min(DyadicCube::count_at(j) - 1);
        let c = DyadicCube::new(j, k).unwrap();
        let [a, b] = c.children();
        prop_assert_eq!(a.left(), c.left());
        prop_assert_eq!(a.right(), b.left());
        prop_assert_eq!(b.right(), c.right());
        prop_assert_eq!(a.parent().unwrap(), c);
        prop_assert_eq!(b.parent().unwrap(), c);
    }

    #[test]
    fn cube_at_contains_its_point(x in 0.0f64..1.0, j in 0u32..40) {
        let c = cube_at(x, j).unwrap();
        prop_assert!(c.contains(x));
        prop_assert!(c.k < DyadicCube::count_at(j));
    }

    #[test]
    fn restricted_cubes_lie_in_the_window(lo in 0.0f64..0.9, width in 0.05f64..1.0) {
        let hi = (lo + width).min(1.0);
        let f = DyadicFamily::from_fn(0, 10, Window::full(), |c| c.midpoint()).unwrap();
        let w = Window::new(lo, hi).unwrap();
        let r = f.restrict(&w).unwrap();
        for j in r.j_min()..=r.j_max() {
            for (c, v) in r.cubes(j) {
                prop_assert!(w.contains_cube(&c));
                prop_assert_eq!(v, c.midpoint());
            }
            prop_assert_eq!(r.cubes(j).count(), w.cube_count(j));
        }
    }

    #[test]
    fn structure_sums_add_over_dyadic_partitions(
        vals in prop::collection::vec(0.0f64..2.0, 64),
        split in 1u64..16,
        p in -3.0f64..4.0,
    ) {
        let f = DyadicFamily::from_fn(0, 10, Window::full(), |c| vals[(c.k as usize * 7 + c.j as usize) % 64]).unwrap();
        let cut = split as f64 / 16.0;
        let whole = structure_function(&f, &Window::full(), p).unwrap();
        let left = structure_function(&f, &Window::new(0.0, cut).unwrap(), p).unwrap();
        let right = structure_function(&f, &Window::new(cut, 1.0).unwrap(), p).unwrap();
        for j in 4..=10 {
            let w = whole.at(j).unwrap();
            let s = left.at(j).unwrap() + right.at(j).unwrap();
            prop_assert!((w - s).abs() <= 1e-12 * w.max(1e-300), "j={} {} vs {}", j, w, s);
        }
    }

    #[test]
    fn dwt_round_trips(vals in prop::collection::vec(-10.0f64..10.0, 256), filter in 0usize..4) {
        let filter = [Filter::Haar, Filter::Db2, Filter::Db3, Filter::Db4][filter];
        let back = dwt(&vals, filter).unwrap().inverse();
        let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (a, b) in vals.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn leaders_dominate_interior_children(vals in prop::collection::vec(-1.0f64..1.0, 1..200)) {
        let lead = pyramid_from(&vals, 9).leaders();
        for j in 3..9 {
            for (c, v) in lead.cubes(j) {
                for child in c.children() {
                    // the child's neighbourhood sits inside 3c unless it touches a side of it
                    let inside = child.k > 0 && child.k + 1 < DyadicCube::count_at(j + 1);
                    if inside {
                        prop_assert!(v >= lead.get(child).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn p_leader_power_means_increase_in_p(seed in any::<u64>()) {
        // e_p = (sum w |c|^p)^(1/p) with total weight W = (#neighbours)(J - j + 1);
        // the power mean (e_p^p / W)^(1/p) is nondecreasing in p
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..2048).map(|_| rng.random_range(-1.0..1.0)).collect();
        let py = pyramid_from(&vals, 8);
        let ps = [1.0, 2.0, 4.0, 8.0];
        let fams: Vec<_> = ps.iter().map(|p| py.p_leaders(*p).unwrap()).collect();
        for j in 3..=8u32 {
            for i in 0..3 {
                for ((c, a), (_, b)) in fams[i].cubes(j).zip(fams[i + 1].cubes(j)) {
                    let neighbours = if c.touches_boundary() { 2.0 } else { 3.0 };
                    let total = neighbours * (8 - j + 1) as f64;
                    let (ma, mb) = (a / total.powf(1.0 / ps[i]), b / total.powf(1.0 / ps[i + 1]));
                    prop_assert!(mb >= ma * (1.0 - 1e-12), "j={} {:?}: {} < {}", j, c, mb, ma);
                }
            }
        }
    }

    #[test]
    fn frac_integrate_composes(vals in prop::collection::vec(-1.0f64..1.0, 1..50), s1 in -1.0f64..1.0, s2 in -1.0f64..1.0) {
        let py = pyramid_from(&vals, 8);
        let a = py.frac_integrate(s1).frac_integrate(s2);
        let b = py.frac_integrate(s1 + s2);
        for j in 3..=8 {
            for (x, y) in a.scale(j).unwrap().iter().zip(b.scale(j).unwrap()) {
                prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn cascade_scaling_function_is_concave(weights in prop::collection::vec(0.1f64..0.9, 1..9)) {
        let m = cascade(&weights, 12);
        prop_assert!((m.total_mass() - 1.0).abs() < 1e-12);
        let f = plain_measure_family(&m, 12).unwrap();
        let q = linspace_step(-3.0, 3.0, 0.5);
        let sf = scaling_function(&f, &Window::full(), &q, &FitPolicy::default()).unwrap();
        let rms = sf.residuals.iter().copied().fold(0.0, f64::max);
        for w in sf.tau.windows(3) {
            prop_assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-9 + 4.0 * rms);
        }
        for (t, e) in sf.tau.iter().zip(&sf.eta) {
            prop_assert_eq!(*e, t - 1.0);
        }
        prop_assert!((sf.tau_at(0.0).unwrap() + 1.0).abs() < 1e-12);
        prop_assert!(sf.tau_at(1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn legendre_peak_is_minus_tau_zero(weights in prop::collection::vec(0.1f64..0.9, 1..9)) {
        let m = cascade(&weights, 12);
        let f = plain_measure_family(&m, 12).unwrap();
        let q = linspace_step(-3.0, 3.0, 0.25);
        let sf = scaling_function(&f, &Window::full(), &q, &FitPolicy::default()).unwrap();
        let (p, t) = sf.finite_points();
        let spec = legendre_points(&p, &t, &auto_h_grid(&p, &t, 0.005));
        let (_, lmax) = spec.max().unwrap();
        // off by at most one H step times the largest |p|
        prop_assert!(lmax <= 1.0 + 1e-12 && lmax >= 1.0 - 0.005 * 3.0, "{}", lmax);
        let support = spec.support();
        for w in support.windows(3) {
            let chord = w[0].1 + (w[2].1 - w[0].1) * (w[1].0 - w[0].0) / (w[2].0 - w[0].0);
            prop_assert!(w[1].1 >= chord - 1e-9);
        }
    }

    #[test]
    fn sequential_and_parallel_agree(vals in prop::collection::vec(-1.0f64..1.0, 1..100)) {
        let py = pyramid_from(&vals, 12);
        let a = py.leaders_with(Exec::Sequential);
        let b = py.leaders_with(Exec::Parallel);
        prop_assert_eq!(&a, &b);
        let q = [-1.0, 0.5, 2.0];
        let sa = scaling_function(&a, &Window::full(), &q, &FitPolicy::default().with_exec(Exec::Sequential)).unwrap();
        let sb = scaling_function(&b, &Window::full(), &q, &FitPolicy::default().with_exec(Exec::Parallel)).unwrap();
        prop_assert_eq!(sa, sb);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn markov_paths_start_at_zero_and_increase(seed in any::<u64>(), slope in 0.0f64..0.3) {
        let gamma = Profile::Linear { intercept: 0.4, slope, min: None, max: Some(0.9) };
        let path = simulate(&gamma, 1.0, 1 << 12, DEFAULT_TRUNCATION, seed).unwrap();
        prop_assert_eq!(path.samples[0], 0.0);
        prop_assert!(path.samples.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(path.jumps.iter().all(|(t, u)| *t >= 0.0 && *t <= 1.0 && *u >= DEFAULT_TRUNCATION));
    }
}
