use proptest::prelude::*;

use ychannel::format::{PlanDoc, Rat, RegionDoc, SimulationDoc};
use ychannel_core::rate::Rational;
use ychannel_core::scheme::plan_with_extension;
use ychannel_core::simulator::{verify_plan, VerifyMode};
use ychannel_core::{ChannelConfig, Region};

fn config() -> impl Strategy<Value = ChannelConfig> {
    (0u32..=6, 0u32..=6, 0u32..=6).prop_map(|(a, b, c)| {
        let mut g = [a, b, c];
        g.sort_unstable_by(|x, y| y.cmp(x));
        ChannelConfig::new(g[0], g[1], g[2]).unwrap()
    })
}

proptest! {
    #[test]
    fn rationals_round_trip(p in -1_000_000i128..1_000_000, q in 1i128..10_000) {
        let r = Rat(Rational::new(p, q));
        let text = serde_json::to_string(&r).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rat>(&text).unwrap(), r);
    }

    #[test]
    fn regions_round_trip(c in config()) {
        let region = Region::outer_bound(c);
        let doc = RegionDoc::new(&region);
        let back: RegionDoc = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        prop_assert_eq!(back.to_region().unwrap(), region);
    }
}

#[test]
fn plan_documents_round_trip() {
    let c = ChannelConfig::new(3, 3, 3).unwrap();
    for v in Region::outer_bound(c).vertices() {
        let (ext, plan) = plan_with_extension(&v.point, c).unwrap();
        let mut doc = PlanDoc::new(c, &v.point, &ext, &plan);
        doc.simulation = Some(SimulationDoc::from(
            &verify_plan(&plan, VerifyMode::Auto { seed: 2 }).unwrap(),
        ));
        let back: PlanDoc = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(back.original_rates().unwrap(), v.point);
        assert_eq!(back, doc);
    }
}
