//! Exact-sign predicates for planar triangulation.
//!
//! Every predicate answers with the true sign of a determinant. A cheap f64
//! evaluation guarded by a forward error bound settles the common case;
//! inputs too close to degenerate fall back to arbitrary-precision rational
//! arithmetic, where every finite f64 is represented exactly.

use num_rational::BigRational;
use num_traits::Zero;

/// Half an ulp of 1.0, the unit of the error-bound analysis.
const EPS: f64 = f64::EPSILON * 0.5;
const CCW_BOUND: f64 = (3.0 + 16.0 * EPS) * EPS;
const INCIRCLE_BOUND: f64 = (10.0 + 96.0 * EPS) * EPS;

#[inline]
fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn big(v: f64) -> BigRational {
    BigRational::from_float(v).expect("coordinates must be finite")
}

fn rat_sign(v: &BigRational) -> i8 {
    if v.is_zero() {
        0
    } else if v > &BigRational::zero() {
        1
    } else {
        -1
    }
}

/// Sign of cross(b - a, c - a): +1 when (a, b, c) wind counter-clockwise,
/// -1 clockwise, 0 exactly collinear.
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> i8 {
    let detleft = (a[0] - c[0]) * (b[1] - c[1]);
    let detright = (a[1] - c[1]) * (b[0] - c[0]);
    let det = detleft - detright;

    let detsum = if detleft > 0.0 {
        if detright <= 0.0 {
            return sign(det);
        }
        detleft + detright
    } else if detleft < 0.0 {
        if detright >= 0.0 {
            return sign(det);
        }
        -detleft - detright
    } else {
        return sign(det);
    };

    let errbound = CCW_BOUND * detsum;
    if det >= errbound || -det >= errbound {
        return sign(det);
    }
    orient2d_exact(a, b, c)
}

fn orient2d_exact(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> i8 {
    let det = (big(a[0]) - big(c[0])) * (big(b[1]) - big(c[1]))
        - (big(a[1]) - big(c[1])) * (big(b[0]) - big(c[0]));
    rat_sign(&det)
}

/// Sign of the incircle determinant for a counter-clockwise triangle
/// (a, b, c): +1 when d lies strictly inside the circumcircle, -1 strictly
/// outside, 0 exactly on it. A clockwise triangle flips the sign.
pub fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> i8 {
    let adx = a[0] - d[0];
    let ady = a[1] - d[1];
    let bdx = b[0] - d[0];
    let bdy = b[1] - d[1];
    let cdx = c[0] - d[0];
    let cdy = c[1] - d[1];

    let bdxcdy = bdx * cdy;
    let cdxbdy = cdx * bdy;
    let alift = adx * adx + ady * ady;

    let cdxady = cdx * ady;
    let adxcdy = adx * cdy;
    let blift = bdx * bdx + bdy * bdy;

    let adxbdy = adx * bdy;
    let bdxady = bdx * ady;
    let clift = cdx * cdx + cdy * cdy;

    let det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);

    let permanent = (bdxcdy.abs() + cdxbdy.abs()) * alift
        + (cdxady.abs() + adxcdy.abs()) * blift
        + (adxbdy.abs() + bdxady.abs()) * clift;
    let errbound = INCIRCLE_BOUND * permanent;
    if det > errbound || -det > errbound {
        return sign(det);
    }
    incircle_exact(a, b, c, d)
}

fn incircle_exact(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> i8 {
    let adx = big(a[0]) - big(d[0]);
    let ady = big(a[1]) - big(d[1]);
    let bdx = big(b[0]) - big(d[0]);
    let bdy = big(b[1]) - big(d[1]);
    let cdx = big(c[0]) - big(d[0]);
    let cdy = big(c[1]) - big(d[1]);

    let alift = &adx * &adx + &ady * &ady;
    let blift = &bdx * &bdx + &bdy * &bdy;
    let clift = &cdx * &cdx + &cdy * &cdy;

    let det = alift * (&bdx * &cdy - &cdx * &bdy)
        + blift * (&cdx * &ady - &adx * &cdy)
        + clift * (&adx * &bdy - &bdx * &ady);
    rat_sign(&det)
}

/// For a, b, p known collinear: is p strictly inside the open segment (a, b)?
/// Pure comparisons, no arithmetic.
pub fn strictly_between(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    let axis = if (a[0] - b[0]).abs() >= (a[1] - b[1]).abs() { 0 } else { 1 };
    let (lo, hi) = if a[axis] < b[axis] {
        (a[axis], b[axis])
    } else {
        (b[axis], a[axis])
    };
    lo < p[axis] && p[axis] < hi
}

/// Exact sign of cross(b - a, d). Used with small integer-valued directions
/// where the fast path rounds at most a few times.
pub(crate) fn cross_dir_sign(a: [f64; 2], b: [f64; 2], d: [f64; 2]) -> i8 {
    let t1 = (b[0] - a[0]) * d[1];
    let t2 = (b[1] - a[1]) * d[0];
    let det = t1 - t2;
    let bound = 8.0 * f64::EPSILON * (t1.abs() + t2.abs());
    if det > bound || -det > bound {
        return sign(det);
    }
    let exact = (big(b[0]) - big(a[0])) * big(d[1]) - (big(b[1]) - big(a[1])) * big(d[0]);
    rat_sign(&exact)
}

/// Exact sign of dot(p - a, e) for a small integer-valued direction e.
pub(crate) fn dot_dir_sign(a: [f64; 2], p: [f64; 2], e: [f64; 2]) -> i8 {
    let t1 = (p[0] - a[0]) * e[0];
    let t2 = (p[1] - a[1]) * e[1];
    let s = t1 + t2;
    let bound = 8.0 * f64::EPSILON * (t1.abs() + t2.abs());
    if s > bound || -s > bound {
        return sign(s);
    }
    let exact = (big(p[0]) - big(a[0])) * big(e[0]) + (big(p[1]) - big(a[1])) * big(e[1]);
    rat_sign(&exact)
}

/// Exact comparison of |p - c|^2 against |a - c|^2: -1, 0, +1.
pub(crate) fn cmp_dist2(p: [f64; 2], a: [f64; 2], c: [f64; 2]) -> i8 {
    let px = big(p[0]) - big(c[0]);
    let py = big(p[1]) - big(c[1]);
    let ax = big(a[0]) - big(c[0]);
    let ay = big(a[1]) - big(c[1]);
    let diff = &px * &px + &py * &py - (&ax * &ax + &ay * &ay);
    rat_sign(&diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn orient_basic() {
        assert_eq!(orient2d([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]), 1);
        assert_eq!(orient2d([0.0, 0.0], [0.0, 1.0], [1.0, 0.0]), -1);
        assert_eq!(orient2d([0.0, 0.0], [1.0, 1.0], [2.0, 2.0]), 0);
        assert_eq!(orient2d([3.0, 3.0], [3.0, 3.0], [1.0, 7.0]), 0);
    }

    #[test]
    fn orient_filter_matches_exact_near_collinear() {
        let mut state = 7u64;
        for _ in 0..2000 {
            let ax = lcg(&mut state) * 100.0 - 50.0;
            let ay = lcg(&mut state) * 100.0 - 50.0;
            let dx = lcg(&mut state) * 2.0 - 1.0;
            let dy = lcg(&mut state) * 2.0 - 1.0;
            let t = lcg(&mut state) * 3.0 - 1.0;
            let a = [ax, ay];
            let b = [ax + dx, ay + dy];
            // On the line, then nudged by a tiny multiple of an ulp.
            let scale = 2f64.powi(-(40 + (state % 20) as i32));
            let c = [ax + t * dx + dy * scale, ay + t * dy - dx * scale];
            assert_eq!(orient2d(a, b, c), orient2d_exact(a, b, c));
        }
    }

    #[test]
    fn orient_adversarial_ulp_grid() {
        // Near-collinear queries half an ulp apart; naive f64 gets many wrong.
        let b = [12.0, 12.0];
        let c = [24.0, 24.0];
        for i in 0..16 {
            for j in 0..16 {
                let a = [
                    0.5 + i as f64 * f64::EPSILON,
                    0.5 + j as f64 * f64::EPSILON,
                ];
                assert_eq!(orient2d(a, b, c), orient2d_exact(a, b, c));
            }
        }
    }

    #[test]
    fn incircle_basic() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        let c = [-1.0, 0.0];
        assert_eq!(incircle(a, b, c, [0.0, 0.0]), 1);
        assert_eq!(incircle(a, b, c, [0.0, -1.0]), 0);
        assert_eq!(incircle(a, b, c, [2.0, 0.0]), -1);
    }

    #[test]
    fn incircle_cocircular_square_is_zero() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [1.0, 1.0];
        let d = [0.0, 1.0];
        assert_eq!(incircle(a, b, c, d), 0);
        assert_eq!(incircle(b, c, d, a), 0);
    }

    #[test]
    fn incircle_orientation_flips_sign() {
        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        let c = [-1.0, 0.0];
        assert_eq!(incircle(a, c, b, [0.0, 0.0]), -1);
    }

    #[test]
    fn incircle_filter_matches_exact_near_circle() {
        let mut state = 99u64;
        for _ in 0..1500 {
            let cx = lcg(&mut state) * 10.0 - 5.0;
            let cy = lcg(&mut state) * 10.0 - 5.0;
            let r = lcg(&mut state) * 5.0 + 0.5;
            let ang = |s: &mut u64| lcg(s) * std::f64::consts::TAU;
            let mk = |t: f64| [cx + r * t.cos(), cy + r * t.sin()];
            let (t1, t2, t3, t4) = (
                ang(&mut state),
                ang(&mut state),
                ang(&mut state),
                ang(&mut state),
            );
            let a = mk(t1);
            let b = mk(t2);
            let c = mk(t3);
            // Query almost exactly on the circle.
            let bump = 1.0 + (lcg(&mut state) - 0.5) * 2f64.powi(-48);
            let d = [cx + r * bump * t4.cos(), cy + r * bump * t4.sin()];
            assert_eq!(incircle(a, b, c, d), incircle_exact(a, b, c, d));
        }
    }

    #[test]
    fn between_cases() {
        let a = [0.0, 0.0];
        let b = [2.0, 2.0];
        assert!(strictly_between(a, b, [1.0, 1.0]));
        assert!(!strictly_between(a, b, [0.0, 0.0]));
        assert!(!strictly_between(a, b, [2.0, 2.0]));
        assert!(!strictly_between(a, b, [3.0, 3.0]));
        // Vertical segment exercises the y-axis branch.
        let u = [1.0, -1.0];
        let v = [1.0, 4.0];
        assert!(strictly_between(u, v, [1.0, 0.0]));
        assert!(!strictly_between(u, v, [1.0, 5.0]));
    }

    #[test]
    fn direction_sign_helpers() {
        assert_eq!(cross_dir_sign([0.0, 0.0], [1.0, 0.0], [2.0, 1.0]), 1);
        assert_eq!(cross_dir_sign([0.0, 0.0], [2.0, 1.0], [2.0, 1.0]), 0);
        assert_eq!(cross_dir_sign([0.0, 0.0], [0.0, 1.0], [2.0, 1.0]), -1);
        assert_eq!(dot_dir_sign([0.0, 0.0], [1.0, 1.0], [0.0, 2.0]), 1);
        assert_eq!(dot_dir_sign([0.0, 0.0], [1.0, 0.0], [0.0, 2.0]), 0);
        assert_eq!(dot_dir_sign([0.0, 0.0], [1.0, -1.0], [0.0, 2.0]), -1);
        assert_eq!(cmp_dist2([1.0, 0.0], [0.0, 2.0], [0.0, 0.0]), -1);
        assert_eq!(cmp_dist2([0.0, 2.0], [2.0, 0.0], [0.0, 0.0]), 0);
    }
}
