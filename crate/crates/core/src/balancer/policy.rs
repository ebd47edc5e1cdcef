use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::radio::LinkId;

/// Downlink traffic balancing policy at the MgNB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    SingleFr1,
    SingleFr2,
    LinkSwitching,
    PacketDuplication,
    PacketSplitting,
    Dbtb,
}

impl Policy {
    pub const ALL: [Policy; 6] = [
        Policy::SingleFr1,
        Policy::SingleFr2,
        Policy::LinkSwitching,
        Policy::PacketDuplication,
        Policy::PacketSplitting,
        Policy::Dbtb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::SingleFr1 => "single_fr1",
            Policy::SingleFr2 => "single_fr2",
            Policy::LinkSwitching => "link_switching",
            Policy::PacketDuplication => "packet_duplication",
            Policy::PacketSplitting => "packet_splitting",
            Policy::Dbtb => "dbtb",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown policy `{s}`"))
    }
}

/// Latest rate estimates of both links, bits/s.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RateEstimates {
    pub fr1: f64,
    pub fr2: f64,
    pub last_update: f64,
}

pub fn route_single(link: LinkId) -> LinkId {
    link
}

/// Picks the faster link; ties go to FR1.
pub fn route_link_switching(est: &RateEstimates) -> LinkId {
    if est.fr2 > est.fr1 {
        LinkId::Fr2
    } else {
        LinkId::Fr1
    }
}

/// FR1 share of packet splitting: `C_FR1 / (C_FR1 + C_FR2)`, 1 if both are zero.
pub fn fr1_split_probability(est: &RateEstimates) -> f64 {
    let total = est.fr1 + est.fr2;
    if total > 0.0 {
        est.fr1 / total
    } else {
        1.0
    }
}

pub fn route_packet_splitting<R: Rng + ?Sized>(est: &RateEstimates, rng: &mut R) -> LinkId {
    let p = fr1_split_probability(est);
    if p >= 1.0 || rng.random::<f64>() < p {
        LinkId::Fr1
    } else {
        LinkId::Fr2
    }
}

pub fn route_duplication() -> [LinkId; 2] {
    [LinkId::Fr1, LinkId::Fr2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RngStreams;
    use proptest::prelude::*;

    fn est(fr1: f64, fr2: f64) -> RateEstimates {
        RateEstimates {
            fr1,
            fr2,
            last_update: 0.0,
        }
    }

    #[test]
    fn names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
        assert!("dbtbb".parse::<Policy>().is_err());
    }

    #[test]
    fn single_routes_are_constant() {
        assert_eq!(route_single(LinkId::Fr1), LinkId::Fr1);
        assert_eq!(route_single(LinkId::Fr2), LinkId::Fr2);
    }

    #[test]
    fn link_switching_cases() {
        assert_eq!(route_link_switching(&est(200e6, 800e6)), LinkId::Fr2);
        assert_eq!(route_link_switching(&est(200e6, 0.0)), LinkId::Fr1);
        assert_eq!(route_link_switching(&est(300e6, 300e6)), LinkId::Fr1);
    }

    #[test]
    fn splitting_probabilities() {
        assert!((fr1_split_probability(&est(200e6, 800e6)) - 0.2).abs() < 1e-15);
        assert_eq!(fr1_split_probability(&est(200e6, 0.0)), 1.0);
        assert_eq!(fr1_split_probability(&est(5e8, 5e8)), 0.5);
        assert_eq!(fr1_split_probability(&est(0.0, 0.0)), 1.0);
        let mut rng = RngStreams::new(4).stream("ps");
        assert!((0..1000).all(|_| route_packet_splitting(&est(1e8, 0.0), &mut rng) == LinkId::Fr1));
        let n = 100_000;
        let fr1 = (0..n)
            .filter(|_| route_packet_splitting(&est(200e6, 800e6), &mut rng) == LinkId::Fr1)
            .count();
        assert!((fr1 as f64 / n as f64 - 0.2).abs() < 0.01);
    }

    #[test]
    fn duplication_uses_both() {
        assert_eq!(route_duplication(), [LinkId::Fr1, LinkId::Fr2]);
    }

    proptest! {
        #[test]
        fn link_switching_is_scale_invariant(a in 0.0f64..1e10, b in 0.0f64..1e10, k in 1e-6f64..1e6) {
            prop_assert_eq!(route_link_switching(&est(a, b)), route_link_switching(&est(a * k, b * k)));
        }
    }
}
