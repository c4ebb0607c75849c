//! Scratch harness for pinning the sample-panel injection parameters.

use stocknet::dependence::{gaussian_mi, normalize_marginals, pearson_matrix};
use stocknet::matrix::LogBase;
use stocknet::metrics::MetricName;
use stocknet::mi::{
    default_calibration_grid, extranormal_matrix, mi_matrix, BiasCalibration, BinningSpec,
    CorrectionMethod, MiEstimator,
};
use stocknet::nonlin::{graph_metric_test, localize_total, FilterChoice};
use stocknet::sample::{sample_return_panel, SamplePanelSpec, ShiftSpec};
use stocknet::surrogate::SurrogateSpec;

fn main() {
    let t = 1500;
    let spec = BinningSpec::new(4, t).unwrap();
    let dir = std::path::Path::new("/tmp/stocknet-calib");
    let calib =
        BiasCalibration::load_or_build(dir, &spec, &default_calibration_grid(), 1000, 1).unwrap();
    let est = MiEstimator::new(&calib, CorrectionMethod::GaussianInversion, LogBase::Nats);

    let args: Vec<String> = std::env::args().collect();
    let size_sd: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3.0);
    let vol: f64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let end_frac: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let start_frac: f64 = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let filt = if args.get(8).map(|s| s == "mst").unwrap_or(false) {
        FilterChoice::Mst
    } else {
        FilterChoice::Pmfg
    };
    let seed0: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(7);
    let nseeds: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(5);
    let ns: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(99);

    for seed in seed0..seed0 + nseeds {
        let pspec = SamplePanelSpec {
            seed,
            shift: Some(ShiftSpec { series: 17, start_frac, end_frac, size_sd, vol_factor: vol }),
            ..Default::default()
        };
        let panel = sample_return_panel(&pspec).unwrap();

        // localization on the raw panel
        let mi = mi_matrix(&panel, &est).unwrap();
        let ig = gaussian_mi(&pearson_matrix(&panel).unwrap(), LogBase::Nats).unwrap();
        let ie = extranormal_matrix(&mi, &ig).unwrap();
        let loc = localize_total(&ie).unwrap();
        let margin = loc.totals[17]
            - loc
                .totals
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != 17)
                .map(|(_, &v)| v)
                .fold(f64::MIN, f64::max);

        // pre-treatment test (shift in, no normalization)
        let pre = graph_metric_test(
            &panel,
            &est,
            filt,
            SurrogateSpec { count: ns, seed: 1000 + seed },
            &MetricName::default_test_set(),
        )
        .unwrap();

        // post-treatment: drop + normalize
        let treated = normalize_marginals(&panel.drop_series(&["S17"]).unwrap())
            .unwrap()
            .into_panel();
        let post = graph_metric_test(
            &treated,
            &est,
            FilterChoice::Pmfg,
            SurrogateSpec { count: 199, seed: 2000 + seed },
            &MetricName::default_test_set(),
        )
        .unwrap();

        let fmt = |r: &stocknet::nonlin::TestReport| {
            r.metrics
                .iter()
                .map(|m| {
                    format!(
                        "{}={}",
                        m.null.metric,
                        m.p_value.map(|p| format!("{p:.3}")).unwrap_or("NA".into())
                    )
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!(
            "seed={seed} size={size_sd}: loc_rank0={} margin={margin:.4}\n  pre : {}\n  post: {}",
            loc.ranking[0],
            fmt(&pre),
            fmt(&post)
        );
    }
}
