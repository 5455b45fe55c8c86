use feti_core::decomposition::{build_constraints, build_partition, DirichletCondition};
use feti_core::fem::{DensityField, EdgeSpec, Material, StructuredMesh};
use feti_core::problems::{
    academic_preset, direct_oracle, grid3x3_layered, grid4x4_inclusion, laminated_beam, mbb_modular_snapshot,
    mbb_problem, read_problem, restrict_to_subdomains, write_snapshot, AcademicOptions, MbbOptions, ProblemSpec,
    SimpOptions, TractionLoad, ACADEMIC_PRESETS,
};

/// Two unit squares in a row with roller supports on the left edge and a
/// uniform tension on the right edge.
fn tension_bar(traction: f64) -> ProblemSpec {
    let n = 4;
    let mesh = StructuredMesh::new(n, n, 0.25, 0.25, [0.0, 0.0]).unwrap();
    let gnx = 2 * n + 1;
    let mut dirichlet: Vec<_> =
        (0..=n).map(|j| DirichletCondition { node: j * gnx, direction: 0, value: 0.0 }).collect();
    dirichlet.push(DirichletCondition { node: 0, direction: 1, value: 0.0 });
    ProblemSpec {
        name: "bar".into(),
        grid: (2, 1),
        elems: (n, n),
        module_types: vec![0, 0],
        type_densities: vec![DensityField::uniform(n, n, 1.0).unwrap()],
        material: Material::default(),
        dirichlet,
        tractions: vec![TractionLoad { subdomain: 1, edge: EdgeSpec::right(&mesh), traction: [traction, 0.0] }],
        point_loads: vec![],
        contrast: 1.0,
    }
}

#[test]
fn oracle_zero_load_gives_zero() {
    let sol = direct_oracle(&tension_bar(0.0)).unwrap();
    assert!(sol.displacement.iter().all(|&u| u == 0.0));
}

#[test]
fn oracle_matches_uniform_strain() {
    let p = tension_bar(2.0);
    let sol = direct_oracle(&p).unwrap();
    let e = p.material.e0;
    let nu = p.material.nu;
    let (gnx, gny) = (9, 5);
    let h = 0.25;
    let mut worst = 0.0_f64;
    for j in 0..gny {
        for i in 0..gnx {
            let g = j * gnx + i;
            let (x, y) = (i as f64 * h, j as f64 * h);
            worst = worst.max((sol.displacement[2 * g] - 2.0 * x / e).abs());
            worst = worst.max((sol.displacement[2 * g + 1] + nu * 2.0 * y / e).abs());
        }
    }
    // Largest displacement is 2 * 2 / E.
    assert!(worst <= 1e-8 * 4.0 / e, "{worst:e}");
}

#[test]
fn oracle_satisfies_constraints_and_equilibrium() {
    for name in ACADEMIC_PRESETS {
        let p = academic_preset(name, &AcademicOptions { contrast: 100.0, ..AcademicOptions::with_elems(4) })
            .or_else(|_| academic_preset(name, &AcademicOptions { contrast: 100.0, ..AcademicOptions::with_elems(14) }))
            .unwrap();
        let subs = p.substructure().unwrap();
        let sol = direct_oracle(&p).unwrap();
        let local = restrict_to_subdomains(&subs.partition, &sol.displacement);
        let b = build_constraints(&subs.partition, &subs.dirichlet).unwrap();
        let jump = b.apply(&local);
        let gap = b.gap();
        let scale = sol.displacement.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(jump.iter().zip(&gap).all(|(a, c)| (a - c).abs() <= 1e-9 * scale), "{name}");

        // Assembled residual on free DOFs.
        let mut res = vec![0.0; sol.load.len()];
        for (s, sub) in subs.subdomains.iter().enumerate() {
            let ku = sub.stiffness.mul_vec(&local[s]);
            for l in 0..sub.mesh.node_count() {
                let g = subs.partition.local_to_global(s, l);
                for d in 0..2 {
                    res[2 * g + d] += ku[2 * l + d] - sub.load[2 * l + d];
                }
            }
        }
        for dc in &subs.dirichlet {
            res[2 * dc.node + dc.direction] = 0.0;
        }
        let rn = res.iter().map(|v| v * v).sum::<f64>().sqrt();
        let fnorm = sol.load.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(rn <= 1e-10 * fnorm, "{name}: {rn:e}");
    }
}

#[test]
fn presets_match_their_definitions() {
    let lam = laminated_beam(&AcademicOptions::default()).unwrap();
    assert_eq!(lam.subdomain_count(), 9);
    let d = &lam.type_densities[0];
    let mut switches = 0;
    for j in 1..d.ny() {
        if d.get(0, j) != d.get(0, j - 1) {
            switches += 1;
        }
    }
    assert_eq!(switches + 1, 7);

    let g = grid3x3_layered(&AcademicOptions::with_elems(8)).unwrap();
    let part = g.partition().unwrap();
    assert_eq!(part.cross_points().len(), 4);

    let inc = grid4x4_inclusion(&AcademicOptions::with_elems(8)).unwrap();
    assert_eq!(inc.subdomain_count(), 16);
}

#[test]
fn presets_are_bitwise_deterministic() {
    for name in ["grid3x3", "inclusion"] {
        let o = AcademicOptions::with_elems(8);
        let a = academic_preset(name, &o).unwrap();
        let b = academic_preset(name, &o).unwrap();
        assert_eq!(a, b);
        let ka = a.substructure().unwrap();
        let kb = b.substructure().unwrap();
        for (x, y) in ka.subdomains.iter().zip(&kb.subdomains) {
            assert_eq!(x.stiffness.diagonal(), y.stiffness.diagonal());
            assert_eq!(x.load, y.load);
        }
    }
}

/// `(min, max)` of stiffness diagonals over interface DOFs of all copies.
fn interface_diagonal_range(p: &ProblemSpec) -> (f64, f64) {
    let subs = p.substructure().unwrap();
    let part = &subs.partition;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for g in part.interface_nodes() {
        for &(s, l) in part.owners(g) {
            let diag = subs.subdomains[s].stiffness.diagonal();
            for d in 0..2 {
                lo = lo.min(diag[2 * l + d]);
                hi = hi.max(diag[2 * l + d]);
            }
        }
    }
    (lo, hi)
}

#[test]
fn inclusion_interface_diagonals_agree_across_neighbours() {
    let p = grid4x4_inclusion(&AcademicOptions::with_elems(8)).unwrap();
    let subs = p.substructure().unwrap();
    let part = &subs.partition;
    for g in part.interface_nodes() {
        let owners = part.owners(g);
        let first: Vec<f64> = {
            let (s, l) = owners[0];
            let d = subs.subdomains[s].stiffness.diagonal();
            vec![d[2 * l], d[2 * l + 1]]
        };
        for &(s, l) in &owners[1..] {
            let d = subs.subdomains[s].stiffness.diagonal();
            assert_eq!([d[2 * l], d[2 * l + 1]], [first[0], first[1]], "node {g}");
        }
    }
}

#[test]
fn full_scale_geometry() {
    let part = build_partition(12, 8, (30, 30), None).unwrap();
    assert_eq!(part.total_subdomain_dofs(), 184_512);
    let p = mbb_problem(&MbbOptions::default()).unwrap();
    let subs_dirichlet = p.dirichlet.clone();
    let part = p.partition().unwrap();
    let c = build_constraints(&part, &subs_dirichlet).unwrap();
    assert!(c.len() > 10_000, "{}", c.len());
}

#[test]
fn simp_descends_and_sharpens_interfaces() {
    let run = mbb_modular_snapshot(&[0, 4, 30], &MbbOptions::with_elems(4), &SimpOptions::default()).unwrap();
    assert_eq!(run.snapshots.len(), 3);
    let uniform = &run.snapshots[0].1;
    assert!(uniform.type_densities.iter().all(|d| d.values().iter().all(|&v| v == 0.5)));
    assert!(run.compliance[30] < run.compliance[4]);
    let (lo4, hi4) = interface_diagonal_range(&run.snapshots[1].1);
    let (lo30, hi30) = interface_diagonal_range(&run.snapshots[2].1);
    assert!(hi30 / lo30 >= hi4 / lo4, "{} vs {}", hi30 / lo30, hi4 / lo4);
    // Module copies stay identical.
    let s = &run.snapshots[2].1;
    let g = s.global_density().unwrap();
    let mut back = s.clone();
    back.set_from_global_density(&g).unwrap();
    assert_eq!(&back, s);
}

#[test]
fn snapshot_files_round_trip() {
    let run = mbb_modular_snapshot(&[2], &MbbOptions::with_elems(2), &SimpOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (it, p) = &run.snapshots[0];
    let path = write_snapshot(dir.path(), *it, p).unwrap();
    assert!(path.ends_with("snapshot_2.problem"));
    assert_eq!(&read_problem(&path).unwrap(), p);
}
