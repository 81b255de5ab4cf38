//! Workloads shared by the benchmarks.

use balayage_core::hull::{padded_box, rasterize, GridMask};
use balayage_core::lyons::{build_example5, Example5, LyonsFixture};
use balayage_core::{
    Ball, ComponentKind, ContinuousComponent, DiscreteCharge, Family, FamilyDescriptor, Point, Result,
    SetExpr,
};

/// The flattened standard counterexample at the given level.
pub fn example5(level: usize) -> Result<Example5> {
    build_example5(&LyonsFixture::standard(), level)?.flatten()
}

/// Default subharmonic family over the unit disk, poles kept off `avoid`.
pub fn default_family(avoid: &[&DiscreteCharge]) -> Result<Family> {
    Family::subharmonic(&FamilyDescriptor::default(), &Ball::unit(2), avoid)
}

/// A flattened planar mollifier centered at the origin.
pub fn mollifier(radius: f64, level: usize) -> Result<DiscreteCharge> {
    DiscreteCharge::from_component(ContinuousComponent::new(
        ComponentKind::Mollifier,
        Point::origin(2),
        radius,
        1.0,
        level,
    ))?
    .flatten()
}

/// `O` = unit disk and `K` = the shell `0.45 <= |x| <= 0.55`, rasterized at `h`.
pub fn shell_masks(h: f64) -> Result<(GridMask, GridMask)> {
    let o = SetExpr::ball(Point::origin(2), 1.0, false);
    let k = SetExpr::Annulus {
        center: Point::origin(2),
        inner: 0.45,
        outer: 0.55,
    };
    let (lo, hi) = padded_box(&o, h, 2)?;
    Ok((rasterize(&o, &lo, &hi, h)?, rasterize(&k, &lo, &hi, h)?))
}
