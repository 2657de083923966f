#include "ctxr/taxonomy.hpp"

#include <regex>

namespace ctxr {

const std::vector<std::string>& vertebra_levels()
{
    static const std::vector<std::string> levels = [] {
        std::vector<std::string> v;
        for (int i = 1; i <= 7; ++i) v.push_back("C" + std::to_string(i));
        for (int i = 1; i <= 12; ++i) v.push_back("T" + std::to_string(i));
        for (int i = 1; i <= 5; ++i) v.push_back("L" + std::to_string(i));
        return v;
    }();
    return levels;
}

std::string vertebra_class(const std::string& level)
{
    return "vertebrae_" + level;
}

bool is_vertebra_class(const std::string& name)
{
    static const std::regex pattern("vertebrae_(C[1-7]|T([1-9]|1[0-2])|L[1-5])");
    return std::regex_match(name, pattern);
}

std::string posterior_rib_class(const std::string& side, int index)
{
    return "rib_posterior_" + side + "_" + std::to_string(index);
}

std::optional<RibId> parse_posterior_rib(const std::string& name)
{
    static const std::regex pattern("rib_posterior_(left|right)_([1-9]|1[0-2])");
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) return std::nullopt;
    return RibId{m[1].str(), std::stoi(m[2].str())};
}

} // namespace ctxr
