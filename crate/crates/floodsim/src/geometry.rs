//! Channel cross-section geometry.
//!
//! All channels are rectangular with vertical walls: the width function is
//! zero below the bed, constant `B` between the bed and the channel top, and
//! held at `B` above the top. The wall elevation (overtopping threshold) is
//! the lower of the two bank elevations.

use crate::{Error, Result, GRAVITY};

/// Rectangular channel cross-section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCrossSection {
    /// Bed elevation `Z_b`, m.
    pub bed_elevation: f64,
    /// Channel width `B`, m.
    pub width: f64,
    /// Left (south) bank elevation, m.
    pub bank_left: f64,
    /// Right (north) bank elevation, m.
    pub bank_right: f64,
    /// Manning roughness coefficient, s/m^(1/3).
    pub manning_n: f64,
}

impl ChannelCrossSection {
    pub fn new(
        bed_elevation: f64,
        width: f64,
        bank_left: f64,
        bank_right: f64,
        manning_n: f64,
    ) -> Result<Self> {
        if width <= 0.0 || width.is_nan() {
            return Err(Error::Geometry(format!("width must be positive, got {width}")));
        }
        if bank_left < bed_elevation || bank_right < bed_elevation {
            return Err(Error::Geometry(format!(
                "bank elevations ({bank_left}, {bank_right}) must not be below the bed ({bed_elevation})"
            )));
        }
        if manning_n < 0.0 || manning_n.is_nan() {
            return Err(Error::Geometry(format!("manning_n must be >= 0, got {manning_n}")));
        }
        Ok(Self { bed_elevation, width, bank_left, bank_right, manning_n })
    }

    /// Wall elevation `z_b^w = min(z_bl, z_br)`: the lower bank, above which
    /// the section floods.
    pub fn wall_elevation(&self) -> f64 {
        self.bank_left.min(self.bank_right)
    }

    /// Wetted area for a given depth: `A = B * h` (rectangular).
    pub fn wetted_area(&self, depth: f64) -> Result<f64> {
        if depth < 0.0 {
            return Err(Error::Geometry(format!("depth must be >= 0, got {depth}")));
        }
        Ok(self.width * depth)
    }

    /// Depth for a given wetted area: `h = A / B`.
    pub fn depth_from_area(&self, area: f64) -> Result<f64> {
        if area < 0.0 {
            return Err(Error::Geometry(format!("area must be >= 0, got {area}")));
        }
        Ok(area / self.width)
    }

    /// Top width at free-surface elevation `eta`: zero below the bed,
    /// `B` otherwise (vertical walls, width held constant above the top).
    pub fn top_width(&self, eta: f64) -> f64 {
        if eta < self.bed_elevation {
            0.0
        } else {
            self.width
        }
    }

    /// Wetted perimeter `P = B + 2 A / B` (bed plus both vertical walls).
    pub fn wetted_perimeter(&self, area: f64) -> f64 {
        self.width + 2.0 * (area.max(0.0) / self.width)
    }

    /// Manning conveyance `K = A^(5/3) / (n P^(2/3))`.
    ///
    /// Returns 0 for a dry section (the limit of the formula), and infinity
    /// for a frictionless section (`n = 0`), which makes the friction slope
    /// vanish.
    pub fn conveyance(&self, area: f64) -> f64 {
        if area <= 0.0 {
            return 0.0;
        }
        if self.manning_n == 0.0 {
            return f64::INFINITY;
        }
        let p = self.wetted_perimeter(area);
        area.powf(5.0 / 3.0) / (self.manning_n * p.powf(2.0 / 3.0))
    }

    /// Friction slope `S_f = Q |Q| / K^2`; odd in Q.
    pub fn friction_slope(&self, area: f64, discharge: f64) -> Result<f64> {
        if discharge == 0.0 || self.manning_n == 0.0 {
            return Ok(0.0);
        }
        if area <= 0.0 {
            return Err(Error::DryFriction);
        }
        let k = self.conveyance(area);
        Ok(discharge * discharge.abs() / (k * k))
    }

    /// Gravity-wave celerity `c = sqrt(g A / B)` for the section.
    pub fn celerity(&self, area: f64) -> f64 {
        (GRAVITY * area.max(0.0) / self.width).sqrt()
    }
}

/// Conserved 1D channel state: wetted area and frontal discharge.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SectionState {
    /// Wetted cross-sectional area `A`, m^2.
    pub area: f64,
    /// Section-averaged discharge `Q`, m^3/s.
    pub discharge: f64,
}

impl SectionState {
    pub fn new(area: f64, discharge: f64) -> Self {
        Self { area, discharge }
    }

    /// Section-averaged velocity `u = Q / A`, zero for dry sections.
    pub fn velocity(&self, cs: &ChannelCrossSection) -> f64 {
        if self.area > crate::DRY_DEPTH * cs.width {
            self.discharge / self.area
        } else {
            0.0
        }
    }

    /// Flow depth `h = A / B`.
    pub fn depth(&self, cs: &ChannelCrossSection) -> f64 {
        self.area / cs.width
    }

    /// Free-surface elevation `eta = Z_b + h`.
    pub fn surface_elevation(&self, cs: &ChannelCrossSection) -> f64 {
        cs.bed_elevation + self.depth(cs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn section(width: f64, n: f64) -> ChannelCrossSection {
        ChannelCrossSection::new(0.0, width, 1.0, 1.0, n).unwrap()
    }

    #[test]
    fn wall_elevation_is_min_of_banks() {
        let cs = ChannelCrossSection::new(0.0, 0.5, 0.5, 0.5, 0.0).unwrap();
        assert_eq!(cs.wall_elevation(), 0.5);
        let cs = ChannelCrossSection::new(0.0, 0.5, 0.2, 0.9, 0.0).unwrap();
        assert_eq!(cs.wall_elevation(), 0.2);
    }

    #[test]
    fn wall_elevation_matches_tanh_profile() {
        // Wall profile of the overtopping test case, evaluated at x = 12.
        let x: f64 = 12.0;
        let expected = 0.06 * (3.0 * (x - 15.5)).tanh() + 0.14;
        let cs = ChannelCrossSection::new(0.0, 1.0, expected, 1.0, 0.009).unwrap();
        assert_eq!(cs.wall_elevation(), expected);
        // tanh(-10.5) is within 2e-9 of -1, so the wall sits just above 0.08.
        assert!((cs.wall_elevation() - 0.08).abs() < 1e-9);
        assert!(cs.wall_elevation() > 0.08);
    }

    #[test]
    fn wetted_area_examples() {
        let cs = section(0.5, 0.009);
        assert_eq!(cs.wetted_area(0.0).unwrap(), 0.0);
        assert!((cs.wetted_area(0.504).unwrap() - 0.252).abs() < 1e-15);
        let unit = section(1.0, 0.0);
        assert_eq!(unit.wetted_area(2.5).unwrap(), 2.5);
        assert!(cs.wetted_area(-0.1).is_err());
    }

    #[test]
    fn depth_from_area_examples() {
        let cs = section(0.5, 0.009);
        assert_eq!(cs.depth_from_area(0.0).unwrap(), 0.0);
        assert!((cs.depth_from_area(0.252).unwrap() - 0.504).abs() < 1e-15);
        let wide = section(2.0, 0.0);
        assert!((wide.depth_from_area(3.0).unwrap() - 1.5).abs() < 1e-15);
        assert!(cs.depth_from_area(-1.0).is_err());
    }

    #[test]
    fn top_width_cases() {
        let cs = ChannelCrossSection::new(1.0, 0.5, 1.3, 1.4, 0.0).unwrap();
        assert_eq!(cs.top_width(0.9), 0.0); // below bed
        assert_eq!(cs.top_width(1.1), 0.5); // inside walls
        assert_eq!(cs.top_width(cs.wall_elevation() + 5.0), 0.5); // above wall
    }

    #[test]
    fn wetted_perimeter_examples() {
        let cs = section(0.5, 0.009);
        assert_eq!(cs.wetted_perimeter(0.0), 0.5);
        assert!((cs.wetted_perimeter(0.252) - 1.508).abs() < 1e-14);
        let unit = section(1.0, 0.0);
        assert!((unit.wetted_perimeter(1.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn conveyance_examples() {
        let cs = section(0.5, 0.009);
        assert_eq!(cs.conveyance(0.0), 0.0);

        // Direct evaluation of A^(5/3) / (n P^(2/3)) at the reservoir depth.
        let a: f64 = 0.252;
        let p: f64 = 1.508;
        let expected = a.powf(5.0 / 3.0) / (0.009 * p.powf(2.0 / 3.0));
        let k = cs.conveyance(a);
        assert!((k - expected).abs() < 1e-12 * expected);
        assert!((k - 8.4948).abs() < 1e-3, "k = {k}");

        // K is inversely proportional to n.
        let cs2 = section(0.5, 0.018);
        assert!((cs2.conveyance(a) - k / 2.0).abs() < 1e-12 * k);
    }

    #[test]
    fn friction_slope_examples() {
        let cs = section(0.5, 0.009);
        assert_eq!(cs.friction_slope(0.252, 0.0).unwrap(), 0.0);

        let k = cs.conveyance(0.252);
        let sf = cs.friction_slope(0.252, 0.1).unwrap();
        assert!((sf - 0.01 / (k * k)).abs() < 1e-15);

        // Odd in Q.
        let sf_neg = cs.friction_slope(0.252, -0.1).unwrap();
        assert_eq!(sf, -sf_neg);

        // Dry section with discharge is an error.
        assert!(matches!(cs.friction_slope(0.0, 0.1), Err(Error::DryFriction)));
    }

    #[test]
    fn frictionless_section_has_zero_slope() {
        let cs = section(0.5, 0.0);
        assert_eq!(cs.friction_slope(0.252, 3.0).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn area_depth_round_trip(h in 0.0..10.0f64, b in 0.05..20.0f64) {
            let cs = ChannelCrossSection::new(0.0, b, 50.0, 50.0, 0.01).unwrap();
            let back = cs.depth_from_area(cs.wetted_area(h).unwrap()).unwrap();
            prop_assert!((back - h).abs() <= 1e-14 * h.max(1.0));
        }

        #[test]
        fn monotone_in_depth(h1 in 0.0..10.0f64, dh in 0.0..5.0f64, b in 0.05..20.0f64) {
            let cs = ChannelCrossSection::new(0.0, b, 50.0, 50.0, 0.01).unwrap();
            let h2 = h1 + dh;
            let a1 = cs.wetted_area(h1).unwrap();
            let a2 = cs.wetted_area(h2).unwrap();
            prop_assert!(a2 >= a1);
            prop_assert!(cs.wetted_perimeter(a2) >= cs.wetted_perimeter(a1));
            prop_assert!(cs.conveyance(a2) >= cs.conveyance(a1));
        }

        #[test]
        fn friction_odd_and_quadratic(q in 0.001..10.0f64, a in 0.01..5.0f64) {
            let cs = ChannelCrossSection::new(0.0, 1.0, 50.0, 50.0, 0.02).unwrap();
            let s1 = cs.friction_slope(a, q).unwrap();
            let s2 = cs.friction_slope(a, -q).unwrap();
            prop_assert_eq!(s1, -s2);
            let s4 = cs.friction_slope(a, 2.0 * q).unwrap();
            prop_assert!((s4 - 4.0 * s1).abs() <= 1e-10 * s4.abs().max(1e-300));
        }
    }
}
