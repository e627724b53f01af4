//! Shared fixtures for the criterion benchmarks: a focused point-target
//! scene, its subsampled echoes, and the matched filter bank at a given
//! grid size.

use num_complex::Complex64;

use mlcs_core::mlrda::{build_filters, LookPlan, RdaFilters};
use mlcs_core::sim::{generate_mask, simulate_raw, subsample};
use mlcs_core::{CompressedData, ComplexGrid, MaskPattern, RadarParams, Scene, Seed};

pub struct Fixture {
    pub params: RadarParams,
    pub filters: RdaFilters,
    pub plan: LookPlan,
    pub raw: ComplexGrid,
    pub data: CompressedData,
}

/// Build a benchmark scene: a handful of point targets on an `n x n` grid,
/// echoes subsampled at `rate`, with an `looks`-look formation plan.
pub fn fixture(n: usize, looks: usize, rate: f64) -> Fixture {
    let params = RadarParams::desk_scale(n, n);
    let filters = build_filters(&params, (n, n)).expect("filters");
    let plan = LookPlan::new(n, looks).expect("plan");
    let mut scene = Scene::empty(n, n, &params);
    for k in 0..5 {
        let az = n / 4 + k * n / 10;
        let rg = n / 4 + k * n / 12;
        scene.reflectivity.set(az, rg, Complex64::new(1.0, 0.0));
    }
    let raw = simulate_raw(&scene, &params, Seed(1), None).expect("raw");
    let mask = generate_mask((n, n), rate, Seed(2), MaskPattern::SampleWise).expect("mask");
    let data = subsample(&raw, &mask).expect("subsample");
    Fixture {
        params,
        filters,
        plan,
        raw,
        data,
    }
}
