//! Coupling, overlap and radial integrals against oracles that share no
//! code with the analytic routes.

use std::f64::consts::PI;

use magpot::functional::{effective_rows, FunctionalMode};
use magpot::hydrogenic::{DeltaTriple, Shape};
use magpot::integrals::quad::coupling_quadrature;
use magpot::integrals::{coupling_shapes, overlap_shapes, InteractionTerm, RadialSpec};
use magpot::quantum::Orbital;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
fn gl(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn panels(a: f64, b: f64, count: usize, rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let h = (b - a) / count as f64;
    let mut out = Vec::new();
    for p in 0..count {
        let lo = a + p as f64 * h;
        for &(x, w) in rule {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

/// Real orthonormal spherical harmonic Y_kq.
fn real_ylm(k: i32, q: i32, theta: f64, phi: f64) -> f64 {
    let m = q.abs();
    let x = theta.cos();
    // associated Legendre P_k^m without Condon-Shortley phase
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 1..=m {
        pmm *= (2 * i - 1) as f64 * s;
    }
    let plm = if k == m {
        pmm
    } else {
        let mut pm1 = x * (2 * m + 1) as f64 * pmm;
        if k == m + 1 {
            pm1
        } else {
            let mut pm2 = pmm;
            let mut cur = 0.0;
            for l in m + 2..=k {
                cur = ((2 * l - 1) as f64 * x * pm1 - (l + m - 1) as f64 * pm2) / (l - m) as f64;
                pm2 = pm1;
                pm1 = cur;
            }
            cur
        }
    };
    let mut fact = 1.0;
    for i in (k - m + 1)..=(k + m) {
        fact *= i as f64;
    }
    let norm = ((2 * k + 1) as f64 / (4.0 * PI) / fact).sqrt();
    match q.cmp(&0) {
        std::cmp::Ordering::Equal => norm * plm,
        std::cmp::Ordering::Greater => 2f64.sqrt() * norm * plm * (m as f64 * phi).cos(),
        std::cmp::Ordering::Less => 2f64.sqrt() * norm * plm * (m as f64 * phi).sin(),
    }
}

struct AngGrid {
    pts: Vec<(f64, f64, f64)>,
}

impl AngGrid {
    fn new() -> Self {
        let th = panels(0.0, PI, 2, &gl(40));
        let nphi = 64;
        let mut pts = Vec::new();
        for &(t, wt) in &th {
            for j in 0..nphi {
                let p = 2.0 * PI * j as f64 / nphi as f64;
                pts.push((t, p, wt * t.sin() * 2.0 * PI / nphi as f64));
            }
        }
        AngGrid { pts }
    }

    fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.pts.iter().map(|&(t, p, w)| w * f(t, p)).sum()
    }
}

/// Multipole-expansion value of the normalised <ab|1/r12|ce>; exact when
/// the angular products are finite harmonic sums (delta = 0 here).
fn multipole_coulomb(a: &Shape, b: &Shape, c: &Shape, e: &Shape, kmax: i32) -> f64 {
    let ang = AngGrid::new();
    let rmax = 70.0 / a.xi.min(b.xi).min(c.xi).min(e.xi);
    let outer = panels(0.0, rmax, 40, &gl(24));
    let inner_rule = gl(48);
    let rho1 = |r: f64| a.radial_part(r) * b.radial_part(r) * r * r;
    let rho2 = |r: f64| c.radial_part(r) * e.radial_part(r) * r * r;
    let radial_k = |k: i32| -> f64 {
        outer
            .iter()
            .map(|&(r1, w1)| {
                let lo: f64 = panels(0.0, r1, 2, &inner_rule)
                    .iter()
                    .map(|&(r2, w2)| w2 * rho2(r2) * r2.powi(k))
                    .sum();
                let hi: f64 = panels(r1, rmax, 4, &inner_rule)
                    .iter()
                    .map(|&(r2, w2)| w2 * rho2(r2) / r2.powi(k + 1))
                    .sum();
                w1 * rho1(r1) * (lo / r1.powi(k + 1) + hi * r1.powi(k))
            })
            .sum()
    };
    let mut total = 0.0;
    for k in 0..=kmax {
        let mut ang_sum = 0.0;
        for q in -k..=k {
            let f1 = ang.integrate(|t, p| {
                a.phi_part(p)
                    * a.theta_part(t)
                    * b.phi_part(p)
                    * b.theta_part(t)
                    * real_ylm(k, q, t, p)
            });
            if f1.abs() < 1e-14 {
                continue;
            }
            let f2 = ang.integrate(|t, p| {
                c.phi_part(p)
                    * c.theta_part(t)
                    * e.phi_part(p)
                    * e.theta_part(t)
                    * real_ylm(k, q, t, p)
            });
            ang_sum += f1 * f2;
        }
        if ang_sum != 0.0 {
            total += 4.0 * PI / (2 * k + 1) as f64 * ang_sum * radial_k(k);
        }
    }
    let norm = |s: &Shape| -> f64 {
        let an = ang.integrate(|t, p| (s.phi_part(p) * s.theta_part(t)).powi(2));
        let rn: f64 = outer
            .iter()
            .map(|&(r, w)| w * (s.radial_part(r) * r).powi(2))
            .sum();
        an * rn
    };
    total / (norm(a) * norm(b) * norm(c) * norm(e)).sqrt()
}

fn random_orbital(rng: &mut ChaCha8Rng) -> Orbital {
    let n = rng.gen_range(1..=2u32);
    let l = rng.gen_range(0..n);
    let m = rng.gen_range(-(l as i32)..=l as i32);
    let j = rng.gen_range(0..=1u8);
    let p = if m != 0 { 1 } else { rng.gen_range(0..=1u8) };
    Orbital::new(n, l, m, j, p, rng.gen_range(0.6..2.8))
}

fn shapes(os: &[Orbital], d: &DeltaTriple) -> Vec<Shape> {
    os.iter().map(|o| Shape::new(o, d).unwrap()).collect()
}

#[test]
fn coulomb_matches_multipole_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = DeltaTriple::zero(2);
    let h = InteractionTerm::coulomb(1.0);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    while checked < 24 {
        let os: Vec<Orbital> = (0..4).map(|_| random_orbital(&mut rng)).collect();
        let s = shapes(&os, &d);
        let want = multipole_coulomb(&s[0], &s[1], &s[2], &s[3], 6);
        if want.abs() < 1e-6 {
            // symmetry zero; check the analytic value vanishes too
            let got = coupling_shapes(&s[0], &s[1], &s[2], &s[3], &h)
                .unwrap()
                .value;
            assert!(got.abs() < 1e-9, "{os:?}: {got}");
            continue;
        }
        let got = coupling_shapes(&s[0], &s[1], &s[2], &s[3], &h).unwrap();
        let rel = ((got.value - want) / want).abs();
        worst = worst.max(rel);
        assert!(
            rel < 1e-8,
            "{os:?}: analytic {} multipole {want} rel {rel:e}",
            got.value
        );
        checked += 1;
    }
    eprintln!("multipole oracle: {checked} cases, worst rel {worst:.2e}");
}

/// Analytic coupling vs the 6-D quadrature on random (n <= 2, l <= 1)
/// cases and rows of the fitted potential, with the magnetic corrections on.
#[test]
fn coupling_matches_quadrature_randomised() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows = effective_rows(FunctionalMode::ImprovedVtheta);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    while checked < 20 {
        let z = rng.gen_range(1..=3u32);
        let d = magpot::hydrogenic::deltas(z).unwrap();
        let os: Vec<Orbital> = (0..4).map(|_| random_orbital(&mut rng)).collect();
        let s = shapes(&os, &d);
        let h = rows[rng.gen_range(0..rows.len())];
        let got = coupling_shapes(&s[0], &s[1], &s[2], &s[3], &h).unwrap();
        let want = coupling_quadrature(&s[0], &s[1], &s[2], &s[3], &h, 1e-9).unwrap();
        if want.abs() < 1e-7 {
            assert!(
                got.value.abs() < 1e-6,
                "{os:?} {h:?}: {} vs {want}",
                got.value
            );
            continue;
        }
        let rel = ((got.value - want) / want).abs();
        worst = worst.max(rel);
        assert!(
            rel < 1e-6,
            "{os:?} {h:?}: analytic {} quadrature {want} rel {rel:e}",
            got.value
        );
        checked += 1;
    }
    eprintln!("quadrature oracle: {checked} cases, worst rel {worst:.2e}");
}

#[test]
fn radial_integrals_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 20 {
        let s = [
            rng.gen_range(0.8..5.0),
            rng.gen_range(0.8..5.0),
            rng.gen_range(-1..=3) as f64 + rng.gen_range(0.0..1e-4),
            rng.gen_range(-1..=3) as f64,
            rng.gen_range(-1..=2) as f64,
        ];
        // total degree -2 sits on the edge of convergence
        if s[2].floor() + s[3] + s[4] < -1.0 {
            continue;
        }
        let spec = RadialSpec::V(s);
        let (a, q) = (spec.eval().unwrap(), spec.quadrature(1e-10).unwrap());
        assert!(((a - q) / q).abs() < 1e-8, "Y_V {s:?}: {a} vs {q}");
        checked += 1;
    }
    let mut checked = 0;
    while checked < 20 {
        let s = [
            rng.gen_range(-1..=2) as f64,
            rng.gen_range(-1..=3) as f64,
            rng.gen_range(-1..=3) as f64,
            rng.gen_range(0.8..5.0),
            rng.gen_range(0.8..5.0),
            (2 * rng.gen_range(0..=2)) as f64,
            rng.gen_range(0..=3) as f64,
        ];
        let spec = RadialSpec::III(s);
        // r12^-1 with a bare angular factor is logarithmic and rejected by design
        let Ok(a) = spec.eval() else { continue };
        let q = spec.quadrature(1e-10).unwrap();
        let scale = q.abs().max(1e-9);
        assert!((a - q).abs() / scale < 1e-6, "Y_III {s:?}: {a} vs {q}");
        checked += 1;
    }
}

fn arb_orbital() -> impl Strategy<Value = Orbital> {
    (1u32..=3, 0u32..3, -2i32..=2, 0u8..=1, 0.4f64..4.0)
        .prop_filter("l < n, |m| <= l", |(n, l, m, _, _)| {
            l < n && m.unsigned_abs() <= *l
        })
        .prop_map(|(n, l, m, j, xi)| Orbital::new(n, l, m, j, if m != 0 { 1 } else { 0 }, xi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_is_symmetric_and_bounded(a in arb_orbital(), b in arb_orbital(), z in 1u32..=3) {
        let d = magpot::hydrogenic::deltas(z).unwrap();
        let (sa, sb) = (Shape::new(&a, &d).unwrap(), Shape::new(&b, &d).unwrap());
        let ab = overlap_shapes(&sa, &sb).unwrap();
        let ba = overlap_shapes(&sb, &sa).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab.abs() <= 1.0 + 1e-10);
        prop_assert!((overlap_shapes(&sa, &sa).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coulomb_is_symmetric_under_density_swaps(a in arb_orbital(), b in arb_orbital(), c in arb_orbital()) {
        let d = DeltaTriple::zero(2);
        let s = shapes(&[a, b, c], &d);
        let h = InteractionTerm::coulomb(1.0);
        let v = |i: usize, j: usize, k: usize, l: usize| coupling_shapes(&s[i], &s[j], &s[k], &s[l], &h).unwrap().value;
        let base = v(0, 1, 2, 2);
        prop_assert!((base - v(1, 0, 2, 2)).abs() <= 1e-9 * base.abs().max(1.0));
        prop_assert!((base - v(2, 2, 0, 1)).abs() <= 1e-9 * base.abs().max(1.0));
        // a Coulomb self-energy is positive
        prop_assert!(v(0, 0, 2, 2) > 0.0);
    }
}
