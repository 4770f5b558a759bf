#include "bdm/energy.hpp"

#include <cmath>
#include <cstddef>

#include "bdm/errors.hpp"
#include "bdm/kernels.hpp"

namespace bdm::energy {

std::vector<double> integrate_dod(std::span<const double> timestamps_s,
                                  std::span<const double> current_ma) {
    if (timestamps_s.size() != current_ma.size())
        throw ShapeError("integrate_dod: timestamp/current length mismatch");
    if (timestamps_s.size() < 2)
        throw InsufficientDataError("integrate_dod: need at least 2 samples");

    std::vector<double> dod(timestamps_s.size());
    dod[0] = 0.0;
    for (std::size_t k = 1; k < timestamps_s.size(); ++k) {
        const double dt = timestamps_s[k] - timestamps_s[k - 1];
        if (dt <= 0.0)
            throw ValidationError("integrate_dod: timestamps not strictly increasing at index " +
                                  std::to_string(k));
        dod[k] = dod[k - 1] + 0.5 * (current_ma[k] + current_ma[k - 1]) * dt / 3600.0;
    }
    return dod;
}

EnergyBalance compute_balance(std::span<const TelemetrySample> samples, double eta) {
    if (!(eta > 0.0) || eta > 1.0)
        throw ValidationError("compute_balance: eta must be in (0, 1]");

    EnergyBalance out;
    out.eta = eta;
    out.load_power.resize(samples.size());
    out.battery_power.resize(samples.size());
    out.panel_power_total.resize(samples.size());

    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        double panel_uw = 0.0; // mV * mA = uW
        for (int p = 0; p < 5; ++p) panel_uw += s.panel_voltage[p] * s.panel_current[p];
        out.panel_power_total[k] = panel_uw / 1000.0;          // mW
        out.battery_power[k] = s.batt_voltage * s.batt_current; // V * mA = mW
        out.load_power[k] = out.battery_power[k] + eta * out.panel_power_total[k];
    }
    return out;
}

namespace {

// Variance of the load series battery + eta * panel.
double load_variance(std::span<const double> battery, std::span<const double> panel,
                     double eta) {
    const std::size_t n = battery.size();
    std::vector<double> load(n);
    for (std::size_t k = 0; k < n; ++k) load[k] = battery[k] + eta * panel[k];
    return kernels::variance(load.data(), n);
}

} // namespace

EfficiencyEstimate estimate_efficiency(std::span<const TelemetrySample> samples,
                                       const EfficiencySearch& search) {
    if (samples.empty()) throw EmptyInputError("estimate_efficiency: no samples");

    std::vector<double> battery(samples.size());
    std::vector<double> panel(samples.size());
    std::size_t sunlit = 0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        double panel_uw = 0.0;
        for (int p = 0; p < 5; ++p) panel_uw += s.panel_voltage[p] * s.panel_current[p];
        panel[k] = panel_uw / 1000.0;
        battery[k] = s.batt_voltage * s.batt_current;
        if (panel[k] > 0.0) ++sunlit;
    }

    const double sunlit_fraction =
        static_cast<double>(sunlit) / static_cast<double>(samples.size());
    if (sunlit_fraction < search.min_sunlit_fraction || sunlit < 2)
        throw UnidentifiableError(
            "estimate_efficiency: insufficient sunlit samples, variance objective flat in eta");
    if (kernels::variance(panel.data(), panel.size()) == 0.0)
        throw UnidentifiableError(
            "estimate_efficiency: panel power has zero variance, eta unidentifiable");

    // Golden-section search on [lo, hi].
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = search.lo;
    double b = search.hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = load_variance(battery, panel, c);
    double fd = load_variance(battery, panel, d);
    while (b - a > search.tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = load_variance(battery, panel, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = load_variance(battery, panel, d);
        }
    }
    const double eta = 0.5 * (a + b);
    return {eta, load_variance(battery, panel, eta)};
}

} // namespace bdm::energy
