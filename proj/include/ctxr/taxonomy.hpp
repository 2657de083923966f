#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ctxr {

/// Vertebra levels C1..C7, T1..T12, L1..L5 in cranio-caudal order.
const std::vector<std::string>& vertebra_levels();
std::string vertebra_class(const std::string& level);  // "vertebrae_<level>"
bool is_vertebra_class(const std::string& name);

/// Posterior rib classes are named rib_posterior_<side>_<index>, side left/right, index 1..12.
std::string posterior_rib_class(const std::string& side, int index);

struct RibId {
    std::string side;
    int index = 0;
};

std::optional<RibId> parse_posterior_rib(const std::string& name);

} // namespace ctxr
