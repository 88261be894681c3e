//! Degrees of freedom of the two-user MIMO interference channel with
//! cognitive message sharing and with cooperation.
//!
//! * [`channel`]: antenna configurations, cognition scenarios, channel draws.
//! * [`region`] and [`dof`]: exact rational DOF regions and closed forms.
//! * [`zf`]: the zero-forcing achievability scheme and its rank diagnostics.
//! * [`rates`]: finite-SNR rates, high-SNR slope fits and the cooperative
//!   genie-bound probe.

pub mod channel;
pub mod dof;
pub mod linalg;
pub mod rates;
pub mod region;
pub mod zf;

pub use channel::{sample_channel, swap_users, validate_config, AntennaConfig, ChannelRealization, CognitionScenario};
pub use dof::{
    dof_cooperation, dof_cooperation_upper_bounds, dof_formula, inner_points, inner_region, lemma5_holds,
    outer_region, scenario_ordering_holds, AchievableSet,
};
pub use region::{regions_equal, sum_dof_lp, DofPoint, Halfspace, Region2D};
