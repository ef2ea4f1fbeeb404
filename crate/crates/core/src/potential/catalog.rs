//! Built-in symmetric test potentials.

use std::f64::consts::PI;

use super::{parse_potential, PotentialExpr};
use crate::repgroup::{GroupSpec, GroupWord, StabilizerClaim};

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub potential: PotentialExpr,
    pub group: GroupSpec,
    pub u0: Vec<f64>,
    pub claim: StabilizerClaim,
    pub notes: &'static str,
}

pub const CATALOG_NAMES: [&str; 6] = [
    "ring3d",
    "ring_quartic4",
    "double_rotator",
    "torus4",
    "harmonic2",
    "double_ring2",
];

fn so2_first_plane(n: usize) -> GroupSpec {
    GroupSpec::new(
        n,
        vec![GroupSpec::weighted_circle_generator(n, &[(0, 1)])],
        vec![],
    )
    .expect("valid generator")
}

fn entry(
    name: &'static str,
    source: &str,
    group: GroupSpec,
    u0: Vec<f64>,
    claim: StabilizerClaim,
    notes: &'static str,
) -> CatalogEntry {
    let potential = parse_potential(source, group.n).expect("catalog expression parses");
    CatalogEntry {
        name,
        potential,
        group,
        u0,
        claim,
        notes,
    }
}

pub fn catalog_entry(name: &str) -> Option<CatalogEntry> {
    let e = match name {
        "ring3d" => entry(
            "ring3d",
            "(u1^2+u2^2-1)^2/4 + u3^2/2",
            so2_first_plane(3),
            vec![1.0, 0.0, 0.0],
            StabilizerClaim::trivial(3),
            "Mexican-hat ring times a harmonic vertical direction. Hessian spectrum {2, 0, 1}; \
             radial frequency sqrt(2), vertical frequency 1.",
        ),
        "ring_quartic4" => entry(
            "ring_quartic4",
            "(u1^2+u2^2-1)^2/4 + u3^2/2 + u4^4/4",
            so2_first_plane(4),
            vec![1.0, 0.0, 0.0, 0.0],
            StabilizerClaim::trivial(4),
            "ring3d with an extra quartic well in u4: the kernel exceeds the orbit tangent by one \
             and the orbit is an isolated, degenerate minimum.",
        ),
        "double_rotator" => {
            let a = GroupSpec::weighted_circle_generator(4, &[(0, 1), (2, 3)]);
            let group = GroupSpec::new(4, vec![a], vec![]).expect("valid generator");
            let claim = StabilizerClaim::cyclic(
                &group,
                3,
                GroupWord {
                    exp_coeffs: vec![2.0 * PI / 3.0],
                    finite: vec![],
                },
            )
            .expect("word in range");
            entry(
                "double_rotator",
                "(u3^2+u4^2-1)^2/4 + 3*(u1^2+u2^2)/2 + 0.1*((u1^3-3*u1*u2^2)*u3 + (3*u1^2*u2-u2^3)*u4)",
                group,
                vec![0.0, 0.0, 1.0, 0.0],
                claim,
                "SO(2) acting with weight 1 on (u1,u2) and weight 3 on (u3,u4); the orbit through \
                 (0,0,1,0) has stabilizer Z3, acting on (u1,u2) by rotation through 2pi/3. The cubic \
                 coupling Re(z^3 conj(w)) is invariant only under the weighted circle.",
            )
        }
        "torus4" => {
            let a1 = GroupSpec::weighted_circle_generator(4, &[(0, 1)]);
            let a2 = GroupSpec::weighted_circle_generator(4, &[(2, 1)]);
            let group = GroupSpec::new(4, vec![a1, a2], vec![]).expect("valid generators");
            let claim = StabilizerClaim::circle(&group, vec![1.0, 0.0]);
            entry(
                "torus4",
                "(u3^2+u4^2-1)^2/4 + 1.5*(u1^2+u2^2) + 0.25*(u1^2+u2^2)^2",
                group,
                vec![0.0, 0.0, 1.0, 0.0],
                claim,
                "Two-torus acting by independent rotations of (u1,u2) and (u3,u4). The orbit through \
                 (0,0,1,0) is a circle whose stabilizer is the first circle factor.",
            )
        }
        "harmonic2" => {
            let group = so2_first_plane(2);
            let claim = StabilizerClaim::circle(&group, vec![1.0]);
            entry(
                "harmonic2",
                "(u1^2+u2^2)/2",
                group,
                vec![0.0, 0.0],
                claim,
                "Isotropic oscillator at the origin: the orbit is a point with stabilizer SO(2) \
                 (classical Lyapunov setting).",
            )
        }
        "double_ring2" => entry(
            "double_ring2",
            "(u1^2+u2^2-1)^2*(u1^2+u2^2-1.21)^2",
            so2_first_plane(2),
            vec![1.0, 0.0],
            StabilizerClaim::trivial(2),
            "Two critical rings r = 1 and r = 1.1 with a ring of maxima between them; the orbit \
             r = 1 is non-degenerate but not isolated from other critical points within radius 0.2.",
        ),
        _ => return None,
    };
    Some(e)
}

pub fn catalog() -> Vec<CatalogEntry> {
    CATALOG_NAMES
        .iter()
        .map(|n| catalog_entry(n).expect("listed names exist"))
        .collect()
}
