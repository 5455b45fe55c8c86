use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;

use feti_core::decomposition::{
    admissibility_defect, build_constraints, build_partition, k_scaling, multiplicity_scaling, rigid_body_modes,
    DirichletCondition,
};
use feti_core::fem::{assemble_subdomain, q4_element_stiffness, DensityField, Material, StructuredMesh};
use feti_core::linalg::{pseudo_solve, rank_revealing_cholesky, FixedDofPseudoInverse};

fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
    use rand::Rng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pivoted_cholesky_finds_exact_rank(n in 1usize..=30, frac in 0.0f64..=1.0, seed in any::<u64>()) {
        let rank = ((n as f64) * frac).round() as usize;
        let q = random_orthogonal(n, seed);
        let d = DMatrix::from_fn(n, n, |i, j| if i == j && i < rank { 0.1 + (i as f64 * 0.77).sin().abs() * 10.0 } else { 0.0 });
        let a = q.transpose() * d * &q;
        let a = (&a + a.transpose()) * 0.5;
        let f = rank_revealing_cholesky(&a, 1e-10).unwrap();
        prop_assert_eq!(f.rank, rank);
        prop_assert!((f.reconstruct() - &a).amax() <= 1e-10 * a.amax().max(1.0));
    }

    #[test]
    fn q4_has_rank_five_and_annihilates_rigid_modes(hx in 0.1f64..3.0, hy in 0.1f64..3.0, nu in 0.0f64..0.49, e in 1e-3f64..1e3) {
        let mat = Material { nu, ..Material::default() };
        let k = q4_element_stiffness(&mat, e, hx, hy).unwrap();
        let k = DMatrix::from_fn(8, 8, |i, j| k[i][j]);
        let mesh = StructuredMesh::new(1, 1, hx, hy, [0.0, 0.0]).unwrap();
        // Element DOFs run counter-clockwise; mesh nodes run row by row.
        let r_mesh = rigid_body_modes(&mesh);
        let order = [0, 1, 3, 2];
        let r = DMatrix::from_fn(8, 3, |i, c| r_mesh[(2 * order[i / 2] + i % 2, c)]);
        let knorm = k.norm();
        prop_assert!((&k * &r).amax() <= 1e-12 * knorm * r.amax());
        let eig = k.symmetric_eigenvalues();
        let positive = eig.iter().filter(|&&v| v > 1e-10 * knorm).count();
        prop_assert_eq!(positive, 5);
    }

    #[test]
    fn generalized_inverse_round_trip(n in 2usize..6, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mesh = StructuredMesh::new(n, n, 1.0 / n as f64, 1.0 / n as f64, [0.0, 0.0]).unwrap();
        let d = DensityField::from_fn(n, n, |_, _| rng.gen_range(0.05..1.0)).unwrap();
        let sub = assemble_subdomain(&mesh, &d, &Material::default()).unwrap();
        let r = rigid_body_modes(&mesh);
        let inv = FixedDofPseudoInverse::new(&sub.stiffness, &r).unwrap();
        let u: Vec<f64> = (0..mesh.dof_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = sub.stiffness.mul_vec(&u);
        let x = pseudo_solve(&inv, &f).unwrap();
        let kx = sub.stiffness.mul_vec(&x);
        let err = DVector::from_vec(kx) - DVector::from_column_slice(&f);
        prop_assert!(err.amax() <= 1e-9 * f.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }

    #[test]
    fn scaled_jump_is_admissible(grid in 2usize..=3, seed in any::<u64>(), clamp in any::<bool>()) {
        use rand::Rng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let p = build_partition(grid, grid, (2, 2), None).unwrap();
        let dirichlet: Vec<_> = if clamp {
            (0..2).map(|direction| DirichletCondition { node: 0, direction, value: 0.0 }).collect()
        } else {
            Vec::new()
        };
        let c = build_constraints(&p, &dirichlet).unwrap();
        let diags: Vec<Vec<f64>> = (0..c.subdomain_count())
            .map(|s| (0..c.local_dof_count(s)).map(|_| 10f64.powf(rng.gen_range(-4.0..4.0))).collect())
            .collect();
        prop_assert!(admissibility_defect(&c, &multiplicity_scaling(&c)) <= 1e-12);
        prop_assert!(admissibility_defect(&c, &k_scaling(&c, &diags).unwrap()) <= 1e-12);
    }
}
