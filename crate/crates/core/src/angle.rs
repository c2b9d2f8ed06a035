//! Degree-domain helpers.
//!
//! The trigonometric functions here reduce their argument to the first
//! quadrant before evaluating, so `cos_deg(180 - a) == -cos_deg(a)` and
//! `cos_deg(90) == 0` hold exactly for integer-degree inputs.

/// Reduce an angle into `[0, 360)`.
pub fn wrap_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Reduce an angle into `(-180, 180]`.
pub fn wrap_signed_deg(a: f64) -> f64 {
    let r = wrap_deg(a);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Shortest angular distance between two azimuths, in `[0, 180]`.
pub fn circular_distance_deg(a: f64, b: f64) -> f64 {
    wrap_signed_deg(a - b).abs()
}

fn cos_first_quadrant(x: f64) -> f64 {
    if x > 45.0 {
        (90.0 - x).to_radians().sin()
    } else {
        x.to_radians().cos()
    }
}

pub fn cos_deg(a: f64) -> f64 {
    let mut r = wrap_deg(a);
    if r > 180.0 {
        r = 360.0 - r;
    }
    if r > 90.0 {
        -cos_first_quadrant(180.0 - r)
    } else {
        cos_first_quadrant(r)
    }
}

pub fn sin_deg(a: f64) -> f64 {
    cos_deg(90.0 - a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_symmetries() {
        for a in 0..360 {
            let a = a as f64;
            assert_eq!(cos_deg(180.0 - a), -cos_deg(a));
            assert_eq!(cos_deg(360.0 - a), cos_deg(a));
            assert!((cos_deg(a) - a.to_radians().cos()).abs() < 1e-15);
        }
        assert_eq!(cos_deg(90.0), 0.0);
        assert_eq!(cos_deg(270.0), 0.0);
        assert_eq!(sin_deg(90.0), 1.0);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_deg(-90.0), 270.0);
        assert_eq!(wrap_deg(360.0), 0.0);
        assert!(wrap_deg(-1e-17) < 360.0);
        assert_eq!(wrap_signed_deg(182.25), -177.75);
        assert_eq!(circular_distance_deg(350.0, 10.0), 20.0);
    }
}
