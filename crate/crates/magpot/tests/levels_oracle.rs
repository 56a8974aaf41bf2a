//! Hydrogen-like levels and QED reference terms against test-side oracles.

use magpot::hydrogenic::{
    angular_coeffs, cos_pow, deltas, eigen_xi_energy, eval_orbital, hydrogenic_solution,
    level_difference, ode_residual, radial_coeffs, t_and_l, DeltaTriple,
};
use magpot::qed::{dirac_energy, qed_energy};
use magpot::quantum::{consts, Orbital};
use proptest::prelude::*;

/// delta_1..3 from a 60-digit evaluation of the closed forms.
const DELTAS_60_DIGIT: [(u32, [f64; 3]); 5] = [
    (
        1,
        [
            5.8263041315386042e-15,
            1.1952298968327321e-6,
            4.5504653917620695e-6,
        ],
    ),
    (
        2,
        [
            2.3299886622413802e-14,
            4.7543077998940985e-6,
            1.8121736871921513e-5,
        ],
    ),
    (
        3,
        [
            5.2404782988851392e-14,
            1.067835943652735e-5,
            4.0716333555244596e-5,
        ],
    ),
    (
        10,
        [
            5.7824909299924082e-13,
            1.186183753248061e-4,
            4.5209774626006114e-4,
        ],
    ),
    (
        92,
        [
            2.2023428550699463e-11,
            1.2832320301047516e-2,
            4.4766214789895163e-2,
        ],
    ),
];

/// Energy of the modified equation written out independently of the library.
fn closed_energy(n: u32, l: u32, m: i32, j: u8, p: u8, z: u32, d: [f64; 3]) -> f64 {
    let sj = if j % 2 == 0 { 1.0 } else { -1.0 };
    let sp = if p % 2 == 0 { 1.0 } else { -1.0 };
    let t = l as f64 - m.abs() as f64 + 0.5 - sj * (0.25 - 2.0 * d[1]).sqrt();
    let big_l = t - sp * ((m * m) as f64 + 2.0 * d[0]).sqrt();
    let den = n as f64 - l as f64 - 0.5 + ((big_l + 0.5).powi(2) - 2.0 * d[2]).sqrt();
    let xi = z as f64 / den;
    -0.5 * xi * xi
}

/// Sommerfeld fine-structure energy for j = l + 1/2, rest mass removed,
/// through E = -(1/a^2) x^2 / (sqrt(1+x^2) (1 + sqrt(1+x^2))).
fn sommerfeld(n: u32, l: u32, z: u32) -> f64 {
    let a = consts().alpha;
    let k = l as f64 + 1.0;
    let az = a * z as f64;
    let x = az / (n as f64 - k + (k * k - az * az).sqrt());
    let q = (1.0 + x * x).sqrt();
    -x * x / (q * (1.0 + q)) / (a * a)
}

#[test]
fn deltas_match_high_precision_values() {
    for (z, want) in DELTAS_60_DIGIT {
        let d = deltas(z).unwrap();
        for (got, want) in [d.d1, d.d2, d.d3].into_iter().zip(want) {
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "Z={z}: {got:e} vs {want:e}"
            );
        }
        assert_eq!(d.kdot, 1);
    }
}

#[test]
fn suppose_identities_hold() {
    let k = consts();
    for z in [1, 2, 3, 10, 92] {
        let d = deltas(z).unwrap();
        let dd = [d.d1, d.d2, d.d3];
        let zf = z as f64;
        let az = k.alpha * zf;
        // -1/a^2 + sqrt(1 - (aZ)^2)/a^2 without the cancellation
        let rel = -zf * zf / (1.0 + (1.0 - az * az).sqrt());
        let c = k.delta1s * zf.powi(3);
        let checks = [
            (closed_energy(1, 0, 0, 0, 0, z, dd), rel - 0.75 * c),
            (closed_energy(1, 0, 0, 0, 1, z, dd), rel + 0.25 * c),
            (
                closed_energy(1, 0, 0, 1, 0, z, dd) - closed_energy(2, 0, 0, 0, 0, z, dd),
                16.0 * k.delta2s * zf.powi(4) / 16.0,
            ),
        ];
        for (i, (lhs, rhs)) in checks.into_iter().enumerate() {
            assert!(
                ((lhs - rhs) / rhs).abs() < 1e-9,
                "Z={z} identity {i}: {lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn ground_states_match_printed_table() {
    let h = Orbital::new(1, 0, 0, 0, 0, 1.0);
    let (xi, e) = eigen_xi_energy(&h, 1, &deltas(1).unwrap()).unwrap();
    assert!((e - -0.500007).abs() <= 5e-7, "{e}");
    assert!((xi - 1.0).abs() < 5e-5, "{xi}");
    let (xi, e) = eigen_xi_energy(&h, 92, &deltas(92).unwrap()).unwrap();
    assert!((e - -4861.323984).abs() <= 5e-7, "{e}");
    assert!((xi - 98.6035).abs() < 5e-5, "{xi}");
}

#[test]
fn dirac_matches_sommerfeld() {
    for z in [1, 2, 10, 50, 92] {
        for n in 1..=5 {
            for l in 0..n {
                let got = dirac_energy(n, l, z).unwrap();
                let want = sommerfeld(n, l, z);
                assert!(
                    ((got - want) / want).abs() < 1e-13,
                    "{n} {l} {z}: {got} {want}"
                );
            }
        }
    }
}

#[test]
fn lamb_closure_of_ground_doublet() {
    let k = consts();
    for z in [1, 92] {
        let d = deltas(z).unwrap();
        let o = |p: u8| Orbital::new(1, 0, 0, 0, p, 1.0);
        let got = level_difference(&o(1), &o(0), z, &d).unwrap();
        let want = k.delta1s * (z as f64).powi(3);
        assert!(
            ((got - want) / want).abs() < 1e-10,
            "Z={z}: {got} vs {want}"
        );
        // the QED doublet is a difference of two totals, so f64 limits it to ~1e-9
        let q = qed_energy(1, 0, 0, 1, z).unwrap() - qed_energy(1, 0, 0, 0, z).unwrap();
        assert!(((q - want) / want).abs() < 1e-9);
    }
}

#[test]
fn coefficient_recursions_reduce_to_laguerre_and_legendre() {
    let d = DeltaTriple::zero(1);
    // 2s: 1 - xi r; 3s: 1 - 2 xi r + 2/3 (xi r)^2
    let b = radial_coeffs(&Orbital::new(2, 0, 0, 0, 0, 0.5), &d, 0.5).unwrap();
    assert_eq!(b.len(), 2);
    assert!((b[1] + 0.5).abs() < 1e-15);
    let b = radial_coeffs(&Orbital::new(3, 0, 0, 0, 0, 1.0), &d, 1.0).unwrap();
    assert!(
        (b[1] + 2.0).abs() < 1e-14 && (b[2] - 2.0 / 3.0).abs() < 1e-14,
        "{b:?}"
    );
    // P_2 = (3 cos^2 - 1)/2, so cos^2 - 1/3
    let a = angular_coeffs(&Orbital::new(3, 2, 0, 0, 0, 1.0), &d).unwrap();
    assert_eq!(a.len(), 2);
    assert!((a[1] + 1.0 / 3.0).abs() < 1e-14, "{a:?}");
    // P_3 = (5 cos^3 - 3 cos)/2
    let a = angular_coeffs(&Orbital::new(4, 3, 0, 0, 0, 1.0), &d).unwrap();
    assert!((a[1] + 0.6).abs() < 1e-14, "{a:?}");
}

#[test]
fn level_differences_match_subtraction() {
    for z in [1, 2, 10, 92] {
        let d = deltas(z).unwrap();
        for a in magpot::hydrogenic::TABLE_LEVELS {
            for b in magpot::hydrogenic::TABLE_LEVELS {
                let got = level_difference(&a, &b, z, &d).unwrap();
                let want =
                    eigen_xi_energy(&a, z, &d).unwrap().1 - eigen_xi_energy(&b, z, &d).unwrap().1;
                let scale = eigen_xi_energy(&a, z, &d).unwrap().1.abs();
                assert!((got - want).abs() < 1e-14 * scale, "{a:?} {b:?} Z={z}");
            }
        }
    }
}

#[test]
fn ode_residual_examples() {
    let d = deltas(1).unwrap();
    let samples: Vec<(f64, f64)> = (1..8)
        .map(|k| (0.4 * k as f64, 0.2 + 0.17 * k as f64))
        .collect();
    assert!(ode_residual(&Orbital::new(1, 0, 0, 0, 0, 1.0), &d, 1, &samples).unwrap() < 1e-6);
    // 2p leaves an O(delta_2 / cos^2) angular defect, so sample away from the equator
    let polar: Vec<(f64, f64)> = (1..8)
        .map(|k| (0.4 * k as f64, 0.1 + 0.12 * k as f64))
        .collect();
    assert!(ode_residual(&Orbital::new(2, 1, 0, 0, 0, 1.0), &d, 1, &polar).unwrap() < 1e-5);
}

fn valid_orbital() -> impl Strategy<Value = (u32, u32, i32, u8, u8)> {
    (1u32..=5, 0u32..5, -4i32..=4, 0u8..=1, 0u8..=1)
        .prop_filter("l < n and |m| <= l", |&(n, l, m, _, _)| {
            l < n && m.unsigned_abs() <= l
        })
        .prop_map(|(n, l, m, j, p)| (n, l, m, j, if m != 0 { 1 } else { p }))
}

/// What the truncated cosine polynomial leaves behind in the theta equation,
/// divided by Theta: a_K c_K cos^(T-2K-2) / sum a_k cos^(T-2k), with
/// c_K = (T-2K)(T-2K-1) + 2 delta_2. c_K is O(delta_2^2) when l - |m| is even
/// and about 4 delta_2 when it is odd.
fn truncation_source(o: &Orbital, d: &DeltaTriple, ct: f64) -> f64 {
    let a = angular_coeffs(o, d).unwrap();
    let (t, _) = t_and_l(o, d).unwrap();
    let k = (a.len() - 1) as f64;
    let x = t - 2.0 * k;
    let theta: f64 = a
        .iter()
        .enumerate()
        .map(|(i, ai)| ai * cos_pow(ct, t - 2.0 * i as f64))
        .sum();
    a[a.len() - 1] * (x * (x - 1.0) + 2.0 * d.d2) * cos_pow(ct, x - 2.0) / theta
}

/// H psi - E psi - S psi at a point, by fourth-order Cartesian differences of
/// the unnormalised orbital, relative to |E psi|. S psi is the exact
/// truncation source -(1/2 r^2) [truncation_source] psi.
fn cartesian_residual(o: &Orbital, z: u32, d: &DeltaTriple, e: f64, x: [f64; 3], h: f64) -> f64 {
    let psi = |p: [f64; 3]| {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        eval_orbital(o, d, r, (p[2] / r).acos(), p[1].atan2(p[0])).unwrap()
    };
    let f0 = psi(x);
    let mut lap = 0.0;
    for axis in 0..3 {
        let at = |k: f64| {
            let mut p = x;
            p[axis] += k * h;
            psi(p)
        };
        lap +=
            (-at(2.0) + 16.0 * at(1.0) - 30.0 * f0 + 16.0 * at(-1.0) - at(-2.0)) / (12.0 * h * h);
    }
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let (ct, st2) = (x[2] / r, (x[0] * x[0] + x[1] * x[1]) / (r * r));
    let v = -(z as f64) / r - d.d3 / (r * r) - d.d2 / (r * r * ct * ct) + d.d1 / (r * r * st2);
    let source = -0.5 / (r * r) * truncation_source(o, d, ct) * f0;
    (-0.5 * lap + v * f0 - e * f0 - source).abs() / (e * f0).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bohr_limit((n, l, m, j, p) in valid_orbital(), z in 1u32..=92) {
        let o = Orbital::new(n, l, m, j, p, 1.0);
        let (xi, e) = eigen_xi_energy(&o, z, &DeltaTriple::zero(z)).unwrap();
        // J = 1 moves the radial node count up by one
        let nn = (n + j as u32) as f64;
        let want = -(z as f64).powi(2) / (2.0 * nn * nn);
        prop_assert!(((e - want) / want).abs() < 1e-12, "{:?}: {} vs {}", o, e, want);
        prop_assert!((e + 0.5 * xi * xi).abs() == 0.0);
    }

    #[test]
    fn solutions_satisfy_the_full_equation(
        (n, l, m, j, p) in valid_orbital(),
        z in prop::sample::select(vec![1u32, 2, 3, 10]),
        rs in 0.3f64..3.0,
        th in 0.25f64..1.3,
        mirror in any::<bool>(),
        ph in 0.1f64..6.0,
    ) {
        let d = deltas(z).unwrap();
        let sol = hydrogenic_solution(&Orbital::new(n, l, m, j, p, 1.0), z, &d).unwrap();
        let o = sol.orbital;
        let r = rs * n as f64 / o.xi;
        let th = if mirror { std::f64::consts::PI - th } else { th };
        let x = [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()];
        // stay away from nodal surfaces, where the relative residual is meaningless
        let scale = (0..12)
            .map(|k| eval_orbital(&o, &d, r, 0.2 + 0.2 * k as f64, ph).unwrap().abs())
            .fold(0.0, f64::max);
        let f0 = eval_orbital(&o, &d, r, th, ph).unwrap();
        prop_assume!(f0.abs() > 0.05 * scale);
        let res = cartesian_residual(&o, z, &d, sol.energy, x, 2e-3 * r);
        prop_assert!(res < 1e-6, "{:?} at r={} th={}: {:e}", o, r, th, res);
    }
}
