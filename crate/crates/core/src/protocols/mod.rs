//! Baseline protocols and shared subroutines.

pub mod allocation;
pub mod approx_fair;
pub mod dc;
pub mod safety;
pub mod selection;

pub use allocation::{c_fair_threshold, fair_threshold, Allocation, AllocationRecord, CertificateRow, FairnessCertificate};
pub use approx_fair::{approx_fair, failure_bound, ApproxFairContract, ApproxFairOutcome, ApproxFairStrategy, DcAdapter};
pub use dc::{dc, dc_query_bound};
pub use safety::{approvers, is_safe, is_safe_set, m_safe};
pub use selection::{pcut, victimize, PcutOutcome, VictimizeOutcome};
