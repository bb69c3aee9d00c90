#include "crres/coords.hpp"

#include <set>

namespace crres {

Coordinates::Coordinates(std::vector<std::string> names,
                         std::vector<std::optional<double>> periods)
    : names_(std::move(names)), periods_(std::move(periods)) {
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (!seen.insert(n).second)
            throw std::invalid_argument("duplicate coordinate name: " + n);
    }
    periods_.resize(names_.size());
    for (const auto& p : periods_)
        if (p && *p <= 0) throw std::invalid_argument("coordinate period must be positive");
}

int Coordinates::index_of(const std::string& name) const {
    for (int i = 0; i < dim(); ++i)
        if (names_[i] == name) return i;
    return -1;
}

int Coordinates::require(const std::string& name) const {
    int i = index_of(name);
    if (i < 0) throw std::invalid_argument("unknown coordinate: " + name);
    return i;
}

void Coordinates::set_period(int i, double p) {
    if (p <= 0) throw std::invalid_argument("coordinate period must be positive");
    periods_.at(i) = p;
}

bool Coordinates::all_periodic() const {
    for (const auto& p : periods_)
        if (!p) return false;
    return true;
}

void Coordinates::add_complex_alias(const std::string& name, int re_idx, int im_idx) {
    if (re_idx < 0 || re_idx >= dim() || im_idx < 0 || im_idx >= dim() || re_idx == im_idx)
        throw std::invalid_argument("complex alias must pair two distinct coordinates");
    if (index_of(name) >= 0 || aliases_.count(name))
        throw std::invalid_argument("complex alias name collides: " + name);
    aliases_[name] = ComplexAlias{re_idx, im_idx};
}

const ComplexAlias* Coordinates::complex_alias(const std::string& name) const {
    auto it = aliases_.find(name);
    return it == aliases_.end() ? nullptr : &it->second;
}

} // namespace crres
