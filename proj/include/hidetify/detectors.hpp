#ifndef HIDETIFY_DETECTORS_HPP
#define HIDETIFY_DETECTORS_HPP

#include <optional>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "ramm.hpp"

namespace hidetify {

/// HIM and MIP are the tau = 0.5 reductions of asymHIM and asymMIP.
enum class Detector { asymMIP, MIP, asymHIM, HIM };

inline const char* to_string(Detector d) {
    switch (d) {
        case Detector::asymMIP:
            return "asymMIP";
        case Detector::MIP:
            return "MIP";
        case Detector::asymHIM:
            return "asymHIM";
        case Detector::HIM:
            return "HIM";
    }
    return "?";
}

inline std::optional<Detector> parse_detector(std::string_view name) {
    for (auto d : {Detector::asymMIP, Detector::MIP, Detector::asymHIM, Detector::HIM}) {
        if (name == to_string(d)) {
            return d;
        }
    }
    return std::nullopt;
}

/// Params with the level sequence each detector actually runs with.
inline RammParams effective_params(Detector d, RammParams params) {
    if (d == Detector::MIP || d == Detector::HIM) {
        params.taus = ExpectileSequence::median_only();
    }
    return params;
}

inline DetectionResult run_detector(Detector d, const DataMatrix& data, const RammParams& params) {
    auto eff = effective_params(d, params);
    switch (d) {
        case Detector::asymMIP:
        case Detector::MIP:
            return detect(data, eff);
        case Detector::asymHIM:
        case Detector::HIM:
            return detect_single(data, eff.taus, eff.alpha_valid, eff.threads);
    }
    throw InvalidArgument("unknown detector");
}

}  // namespace hidetify

#endif
