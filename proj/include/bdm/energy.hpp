#pragma once

#include <span>
#include <vector>

#include "bdm/types.hpp"

namespace bdm::energy {

// Per-sample power bookkeeping, milliwatts. load_power is defined by
// construction as battery_power + eta * panel_power_total.
struct EnergyBalance {
    std::vector<double> load_power;
    std::vector<double> battery_power;
    std::vector<double> panel_power_total;
    double eta = 1.0;
};

struct EfficiencySearch {
    double lo = 0.5;                  // physical bounds for a DC/DC path
    double hi = 1.0;
    double tol = 1e-4;
    double min_sunlit_fraction = 0.10;
};

struct EfficiencyEstimate {
    double eta = 0.0;
    double objective = 0.0;           // variance of the load series at eta
};

// Trapezoidal cumulative integral of discharge current over time,
// seconds -> hours. dod[0] == 0, units mA·h.
std::vector<double> integrate_dod(std::span<const double> timestamps_s,
                                  std::span<const double> current_ma);

EnergyBalance compute_balance(std::span<const TelemetrySample> samples, double eta);

// Transfer efficiency by golden-section search: eta minimizing the sample
// variance of the computed load series over [lo, hi].
EfficiencyEstimate estimate_efficiency(std::span<const TelemetrySample> samples,
                                       const EfficiencySearch& search = {});

} // namespace bdm::energy
