#include "bdm/synth.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "bdm/energy.hpp"
#include "bdm/errors.hpp"

namespace bdm::synth {

using nlohmann::json;

namespace {

// Box-Muller on top of mt19937_64 so the stream does not depend on the
// standard library's normal_distribution implementation.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double uniform() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace

DischargeSegment gen_discharge(const SynthSpec& spec) {
    if (spec.profile.empty()) throw ValidationError("gen_discharge: empty current profile");
    if (!(spec.sample_interval_s > 0.0))
        throw ValidationError("gen_discharge: sample interval must be positive");
    if (spec.noise_sigma_v < 0.0) throw ValidationError("gen_discharge: negative noise sigma");
    double total = 0.0;
    for (const auto& step : spec.profile) {
        if (!(step.duration_s > 0.0))
            throw ValidationError("gen_discharge: step durations must be positive");
        total += step.duration_s;
    }

    const auto level_at = [&](double t) {
        double acc = 0.0;
        for (const auto& step : spec.profile) {
            acc += step.duration_s;
            if (t < acc) return step.level_ma;
        }
        return spec.profile.back().level_ma;
    };

    const std::size_t count =
        static_cast<std::size_t>(std::floor(total / spec.sample_interval_s)) + 1;
    std::vector<double> t(count), i(count);
    for (std::size_t k = 0; k < count; ++k) {
        t[k] = static_cast<double>(k) * spec.sample_interval_s;
        i[k] = level_at(t[k]);
    }

    DischargeSegment seg;
    seg.source_date = spec.source_date;
    seg.dod = count >= 2 ? energy::integrate_dod(t, i) : std::vector<double>(count, 0.0);

    Gaussian noise(spec.seed);
    seg.samples.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        auto& s = seg.samples[k];
        s.timestamp = t[k];
        s.batt_current = i[k];
        s.batt_temp = total > 0.0
                          ? spec.temp_start_c +
                                (spec.temp_end_c - spec.temp_start_c) * (t[k] / total)
                          : spec.temp_start_c;
        double v = ecm::predict_voltage(spec.true_params, s.batt_current, seg.dod[k],
                                        s.batt_temp);
        if (spec.noise_sigma_v > 0.0) v += spec.noise_sigma_v * noise();
        if (spec.quantization_v > 0.0)
            v = std::round(v / spec.quantization_v) * spec.quantization_v;
        s.batt_voltage = v;
        s.source_date = spec.source_date;
        // Panel channels stay zero: battery side only.
    }
    return seg;
}

SynthSpec spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("synth spec: invalid JSON: ") + e.what());
    }
    SynthSpec spec;
    try {
        spec.true_params = ecm::params_from_json(j.at("true_params").dump());
        for (const auto& step : j.at("profile"))
            spec.profile.push_back({step.at("level_ma").get<double>(),
                                    step.at("duration_s").get<double>()});
        spec.temp_start_c = j.value("temp_start_c", 5.0);
        spec.temp_end_c = j.value("temp_end_c", spec.temp_start_c);
        spec.noise_sigma_v = j.value("noise_sigma_v", 0.0);
        spec.quantization_v = j.value("quantization_v", 0.0);
        spec.sample_interval_s = j.value("sample_interval_s", 10.0);
        spec.seed = j.value("seed", 0ULL);
        spec.source_date = j.value("source_date", std::string("synthetic"));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("synth spec: ") + e.what());
    }
    return spec;
}

std::string spec_to_json(const SynthSpec& spec) {
    json profile = json::array();
    for (const auto& step : spec.profile)
        profile.push_back({{"level_ma", step.level_ma}, {"duration_s", step.duration_s}});
    json j{
        {"true_params", json::parse(ecm::params_to_json(spec.true_params))},
        {"profile", profile},
        {"temp_start_c", spec.temp_start_c},
        {"temp_end_c", spec.temp_end_c},
        {"noise_sigma_v", spec.noise_sigma_v},
        {"quantization_v", spec.quantization_v},
        {"sample_interval_s", spec.sample_interval_s},
        {"seed", spec.seed},
        {"source_date", spec.source_date},
    };
    return j.dump(2);
}

} // namespace bdm::synth
