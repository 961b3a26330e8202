#pragma once

#include <string>

#include "config.hpp"
#include "error.hpp"

namespace kgcavity {

enum class RegionKind { Left, Right, Probe };

/// A local mode family: sine modes whose t=0 (or t=τ) Cauchy data live on one
/// sub-interval. Left is [0,r], Right is [r,R], Probe is [r̃,R] with r < r̃ < R.
struct Region {
    RegionKind kind = RegionKind::Left;
    double probe_start = 0.0;  // r̃ in user units, Probe only

    static Region left() noexcept { return {RegionKind::Left, 0.0}; }
    static Region right() noexcept { return {RegionKind::Right, 0.0}; }
    static Region probe(double r_tilde, const CavityConfig& cfg) {
        if (!(r_tilde > cfg.r) || !(r_tilde < cfg.R))
            throw DomainError("probe region requires r < r_tilde < R");
        return {RegionKind::Probe, r_tilde};
    }

    friend bool operator==(const Region&, const Region&) = default;
};

/// Support [a,b] of a family in reduced units (R = 1).
struct Interval {
    double a = 0.0;
    double b = 1.0;
    [[nodiscard]] double length() const noexcept { return b - a; }
};

[[nodiscard]] inline Interval support(const Region& region, const CavityConfig& cfg) {
    const CavityConfig red = cfg.reduced();
    switch (region.kind) {
        case RegionKind::Left: return {0.0, red.r};
        case RegionKind::Right: return {red.r, 1.0};
        case RegionKind::Probe: return {region.probe_start / cfg.R, 1.0};
    }
    return {};
}

/// Local frequency of mode m of the family, reduced units.
[[nodiscard]] inline double local_frequency(const Region& region, std::size_t m, const CavityConfig& cfg) {
    return box_frequency(static_cast<double>(m), support(region, cfg).length(), cfg.reduced_mu());
}

[[nodiscard]] inline std::string to_string(const Region& region) {
    switch (region.kind) {
        case RegionKind::Left: return "left";
        case RegionKind::Right: return "right";
        case RegionKind::Probe: return "probe";
    }
    return "?";
}

}  // namespace kgcavity
