#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crres {

struct ComplexAlias {
    int re = -1; ///< index of the real-part coordinate
    int im = -1; ///< index of the imaginary-part coordinate
};

/// An ordered list of distinct real coordinate names, with optional
/// per-coordinate periods (quotient tori) and complex-pair aliases
/// such as z = x1 + i x2.
class Coordinates {
public:
    Coordinates() = default;
    explicit Coordinates(std::vector<std::string> names,
                         std::vector<std::optional<double>> periods = {});

    int dim() const { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }

    int index_of(const std::string& name) const; ///< -1 if unknown
    int require(const std::string& name) const;  ///< throws on unknown

    std::optional<double> period(int i) const { return periods_.at(i); }
    void set_period(int i, double p);
    bool all_periodic() const;

    void add_complex_alias(const std::string& name, int re_idx, int im_idx);
    const ComplexAlias* complex_alias(const std::string& name) const;
    const std::map<std::string, ComplexAlias>& complex_aliases() const {
        return aliases_;
    }

    bool operator==(const Coordinates& o) const {
        return names_ == o.names_;
    }

private:
    std::vector<std::string> names_;
    std::vector<std::optional<double>> periods_;
    std::map<std::string, ComplexAlias> aliases_;
};

using CoordsPtr = std::shared_ptr<const Coordinates>;

inline bool same_coords(const CoordsPtr& a, const CoordsPtr& b) {
    return a == b || (a && b && *a == *b);
}

} // namespace crres
