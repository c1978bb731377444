use proptest::prelude::*;
use steklov_core::domain::validate_domain;
use steklov_core::mesh::{audit, read_mesh, triangulate, write_mesh};
use steklov_core::{BoundaryTag, DomainSpec, NecklaceBase};

fn families() -> Vec<(DomainSpec, f64)> {
    vec![
        (DomainSpec::ball(3).unwrap(), 0.2),
        (DomainSpec::ball(2).unwrap(), 0.2),
        (DomainSpec::annulus(3, 0.3).unwrap(), 0.1),
        (DomainSpec::annulus(2, 0.3).unwrap(), 0.1),
        (DomainSpec::ball_tube(3, 0.1, 0.02).unwrap(), 0.005),
        (DomainSpec::ball_tube(3, 0.3, 0.1).unwrap().with_fillet(0.02).unwrap(), 0.01),
        (DomainSpec::necklace(3, 3, 0.3, NecklaceBase::Ball).unwrap(), 0.05),
        (DomainSpec::necklace(2, 2, 0.2, NecklaceBase::Ball).unwrap(), 0.05),
        (DomainSpec::necklace(3, 2, 0.3, NecklaceBase::BallTube { eps: 0.2, delta: 0.05 }).unwrap(), 0.0125),
    ]
}

#[test]
fn every_family_meshes_cleanly_through_refinement() {
    for (spec, h) in families() {
        assert!(validate_domain(&spec).ok, "{:?}", spec.family);
        let mut mesh = triangulate(&spec, h, 1.0).unwrap();
        for level in 0..3 {
            let report = audit(&mesh);
            assert!(report.ok, "{:?} level {level}: {:?}", spec.family, report.issues);
            assert_eq!(mesh.components(), 1);
            // the meshed polygon converges to the exact boundary measure
            let steklov: f64 = mesh
                .boundary_edges
                .iter()
                .filter(|e| e.tag == BoundaryTag::Steklov)
                .map(|e| {
                    let (p, q) = (mesh.nodes[e.a], mesh.nodes[e.b]);
                    let len = (p[0] - q[0]).hypot(p[1] - q[1]);
                    if spec.dim == 3 { std::f64::consts::PI * (p[0] + q[0]) * len } else { len }
                })
                .sum();
            let err = (steklov - spec.boundary_measure()).abs() / spec.boundary_measure();
            assert!(err < 0.02 / 4f64.powi(level), "{:?} level {level}: measure error {err}", spec.family);
            mesh = mesh.refine();
        }
    }
}

#[test]
fn feature_guard_rejects_coarse_meshes() {
    let spec = DomainSpec::ball_tube(3, 0.1, 0.02).unwrap();
    let err = triangulate(&spec, 0.05, 1.0).unwrap_err().to_string();
    assert!(err.contains("feature size"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mesh_files_round_trip_exactly(h in 0.08f64..0.4, eps in 0.1f64..0.7, refine in 0usize..2) {
        let mut mesh = triangulate(&DomainSpec::annulus(3, eps).unwrap(), h.min(eps / 2.0), 1.0).unwrap();
        for _ in 0..refine {
            mesh = mesh.refine();
        }
        let text = write_mesh(&mesh);
        let back = read_mesh(&text).unwrap();
        prop_assert_eq!(&back.nodes, &mesh.nodes);
        prop_assert_eq!(&back.triangles, &mesh.triangles);
        prop_assert_eq!(&back.boundary_edges, &mesh.boundary_edges);
        prop_assert_eq!(back.h, mesh.h);
        prop_assert_eq!(write_mesh(&back), text);
    }
}
