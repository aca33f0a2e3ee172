use crate::torus::Precision;

/// Precision schedule and work budgets. Exceeding a budget is reported as
/// [`crate::Error::BudgetExceeded`]; nothing is silently approximated.
#[derive(Clone, Debug)]
pub struct Config {
    pub precision: Precision,
    /// Reachable-sum states kept by the cover containment check.
    pub dp_budget: u64,
    /// Longest range `[lo, hi]` scanned one integer at a time.
    pub scan_budget: u64,
    /// Lattice coordinates visited by the single-generator Bohr enumerator.
    pub lattice_budget: u64,
    /// Points of a group ball, i.e. the cap on `(2M + 1)^t`.
    pub ball_budget: u64,
    /// Largest `N` tried by the `N` and `M` searches.
    pub n_budget: u64,
    /// Intervals materialized by one arc-set computation or search.
    pub arc_budget: u64,
    /// Longest window searched for a thin-set anchor.
    pub anchor_budget: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            precision: Precision::default(),
            dp_budget: 10_000_000,
            scan_budget: 20_000_000,
            lattice_budget: 20_000_000,
            ball_budget: 200_000,
            n_budget: 1 << 40,
            arc_budget: 2_000_000,
            anchor_budget: 1 << 50,
        }
    }
}
