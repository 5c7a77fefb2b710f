use proptest::prelude::*;

use reflap::geometry::{PointRef, SpaceModel};
use reflap::harness::ExperimentConfig;
use reflap::laplacian::{GraphLaplacian, Variant};
use reflap::sampling::{net_csv_string, parse_net_csv, sample_net, Net, SamplerConfig, Strategy as Sampler};
use reflap::spectra::dense::{eigen_dense_symmetric, DenseMatrix};
use reflap::spectra::lanczos::{eigen_lanczos, LanczosConfig};
use reflap::Exec;

fn interval_net(seed: u64, eps: f64) -> (SpaceModel, Net) {
    let s = SpaceModel::interval(1.0).unwrap();
    let net = sample_net(&s, &SamplerConfig::new(Sampler::UniformRandom, seed, eps)).unwrap();
    (s, net)
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Closed), Just(Variant::Boundary)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn laplacian_kills_constants(seed in 0u64..1000, rho in 0.05f64..0.3, v in variant()) {
        let (s, net) = interval_net(seed, 0.02);
        let l = GraphLaplacian::build(&s, &net, rho, v).unwrap();
        let out = l.apply(&vec![3.5; net.len()]).unwrap();
        prop_assert!(out.iter().all(|x| x.abs() <= 1e-9 * l.scale));
    }

    #[test]
    fn energy_identity_and_sign(seed in 0u64..1000, rho in 0.05f64..0.3, v in variant(),
                                coef in prop::collection::vec(-2.0f64..2.0, 4)) {
        let (s, net) = interval_net(seed, 0.02);
        let l = GraphLaplacian::build(&s, &net, rho, v).unwrap();
        let u: Vec<f64> = net.points.iter().map(|p| {
            let x = p.coords[0];
            coef[0] + coef[1] * x + coef[2] * (7.0 * x).sin() + coef[3] * x * x
        }).collect();
        let e = l.dirichlet_energy(&u).unwrap();
        let q = -l.inner(&l.apply(&u).unwrap(), &u);
        prop_assert!(e >= 0.0);
        prop_assert!((q - e).abs() <= 1e-10 * e.max(1e-300) + 1e-12 * l.scale);
    }

    #[test]
    fn laplacian_self_adjoint(seed in 0u64..1000, rho in 0.05f64..0.3, v in variant()) {
        let (s, net) = interval_net(seed, 0.03);
        let l = GraphLaplacian::build(&s, &net, rho, v).unwrap();
        let a: Vec<f64> = (0..net.len()).map(|i| ((i * 7919) % 13) as f64).collect();
        let b: Vec<f64> = (0..net.len()).map(|i| ((i * 104729) % 17) as f64 - 8.0).collect();
        let lhs = l.inner(&l.apply(&a).unwrap(), &b);
        let rhs = l.inner(&a, &l.apply(&b).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0));
        let sym = l.to_weighted_symmetric().unwrap();
        prop_assert!(sym.matrix.asymmetry() <= 1e-12 * sym.matrix.norm_inf());
    }

    #[test]
    fn dense_and_lanczos_agree(seed in 0u64..1000, n in 30usize..120) {
        let mut m = DenseMatrix::zeros(n);
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let d = eigen_dense_symmetric(&m).unwrap();
        let mut cfg = LanczosConfig::new(5);
        cfg.dense_cutoff = 0;
        let lz = eigen_lanczos(&m, &cfg, Exec::Sequential).unwrap();
        for k in 0..5 {
            prop_assert!((d.eigenvalues[k] - lz.eigenvalues[k]).abs() <= 1e-8,
                "k={} dense {} lanczos {}", k, d.eigenvalues[k], lz.eigenvalues[k]);
        }
    }

    #[test]
    fn reflected_distance_symmetric_and_not_shorter(x0 in 0.01f64..0.99, y0 in 0.01f64..0.99,
                                                    x1 in 0.01f64..0.99, y1 in 0.01f64..0.99) {
        let s = SpaceModel::rectangle(1.0, 1.0).unwrap();
        let p = PointRef::planar(0, x0, y0);
        let q = PointRef::planar(0, x1, y1);
        let pq = s.reflected_part_distance(&p, &q).unwrap();
        let qp = s.reflected_part_distance(&q, &p).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-14);
        prop_assert!(pq + 1e-14 >= s.part_distance(&p, &q).unwrap());
    }

    #[test]
    fn net_csv_round_trip(seed in 0u64..1000) {
        let (_, net) = interval_net(seed, 0.05);
        let (pts, mu) = parse_net_csv(&net_csv_string(&net)).unwrap();
        prop_assert_eq!(pts, net.points.clone());
        prop_assert_eq!(mu, net.weights.clone());
    }

    #[test]
    fn geometric_schedule_length(start in 0.05f64..0.5, ratio in 0.3f64..0.9, count in 1usize..8) {
        let text = format!(
            "[space]\nkind = \"circle\"\nlength = 1.0\n[schedule]\nstart = {start:?}\nratio = {ratio:?}\ncount = {count}\n"
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let pts = cfg.points().unwrap();
        prop_assert_eq!(pts.len(), count);
        prop_assert!(pts.windows(2).all(|w| w[1].1 < w[0].1));
    }
}
