use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{BlockageProcess, LinkParams};
use crate::engine::SimTime;

/// Radio channel between one gNB and one UE.
///
/// Shadowing is redrawn at every measurement. Between measurements the only
/// thing that moves is the blockage state, so the rates for both blockage
/// states are cached at measurement time.
#[derive(Debug, Clone)]
pub struct Channel {
    distance_m: f64,
    shadowing_db: f64,
    blockage: Option<BlockageProcess>,
    shadow_rng: ChaCha8Rng,
    blockage_rng: ChaCha8Rng,
    rate_clear: f64,
    rate_blocked: f64,
}

impl Channel {
    pub fn new(
        distance_m: f64,
        blockage: Option<BlockageProcess>,
        shadow_rng: ChaCha8Rng,
        blockage_rng: ChaCha8Rng,
    ) -> Self {
        assert!(distance_m > 0.0, "distance must be positive");
        Self {
            distance_m,
            shadowing_db: 0.0,
            blockage,
            shadow_rng,
            blockage_rng,
            rate_clear: 0.0,
            rate_blocked: 0.0,
        }
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }

    pub fn blockage(&self) -> Option<&BlockageProcess> {
        self.blockage.as_ref()
    }

    pub fn shadowing_db(&self) -> f64 {
        self.shadowing_db
    }

    pub fn is_blocked(&mut self, now: SimTime) -> bool {
        match &mut self.blockage {
            Some(b) => {
                b.advance(now, &mut self.blockage_rng);
                b.is_blocked()
            }
            None => false,
        }
    }

    /// SINR with a freshly drawn shadowing value and the blockage state at `now`.
    pub fn sinr_at<R: Rng + ?Sized>(
        &mut self,
        link: &LinkParams,
        now: SimTime,
        rng: &mut R,
    ) -> f64 {
        let shadow = draw_shadowing(link, rng);
        let blocked = self.is_blocked(now);
        let loss = if blocked {
            self.blockage_loss_db()
        } else {
            0.0
        };
        link.sinr_db(self.distance_m, shadow, loss)
    }

    fn blockage_loss_db(&self) -> f64 {
        self.blockage.as_ref().map_or(0.0, |b| b.loss_db())
    }

    /// Redraws shadowing and returns the rate estimate for the current state.
    pub fn measure(&mut self, link: &LinkParams, now: SimTime) -> f64 {
        self.shadowing_db = draw_shadowing(link, &mut self.shadow_rng);
        self.rate_clear = link.rate_of(link.sinr_db(self.distance_m, self.shadowing_db, 0.0));
        self.rate_blocked = match &self.blockage {
            Some(b) => link.rate_of(link.sinr_db(self.distance_m, self.shadowing_db, b.loss_db())),
            None => self.rate_clear,
        };
        self.rate_now(now)
    }

    /// Rate the channel supports at `now` under the current shadowing.
    pub fn rate_now(&mut self, now: SimTime) -> f64 {
        if self.is_blocked(now) {
            self.rate_blocked
        } else {
            self.rate_clear
        }
    }
}

fn draw_shadowing<R: Rng + ?Sized>(link: &LinkParams, rng: &mut R) -> f64 {
    if link.shadowing_sigma_db > 0.0 {
        Normal::new(0.0, link.shadowing_sigma_db)
            .expect("positive sigma")
            .sample(rng)
    } else {
        0.0
    }
}
