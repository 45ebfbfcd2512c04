//! Posted pricing over resources with arrivals, departures and finite inventory.

mod instance;
mod matching;
mod policy;
mod schedule;
mod valuation;

pub use instance::{to_ddmdp, DraccFile, DraccInstance, DraccRound, UserFile};
pub use matching::max_weight_matching;
pub use policy::{make_policy_family, pricing_policy, static_policy, LadderRung, PolicyFamilySpec, PricingPolicies, PricingPolicy};
pub use schedule::{apply_sale, Inventory, PriceVector, Resource, ResourceId, ResourceSchedule};
pub use valuation::{canonical_cmp, demand_by_enumeration, DemandResult, Valuation, EXPLICIT_LIMIT};
