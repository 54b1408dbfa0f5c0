#pragma once

#include <cstddef>
#include <vector>

namespace kdv {

/// Samples of u on the periodic grid x_j = x0 + j L / N at time t.
struct WaveField {
    double x0 = 0.0;
    double length = 0.0;
    double epsilon = 0.0;
    double t = 0.0;
    std::vector<double> u;

    [[nodiscard]] std::size_t size() const { return u.size(); }
    [[nodiscard]] double dx() const { return length / static_cast<double>(u.size()); }
    [[nodiscard]] double x(std::size_t j) const { return x0 + dx() * static_cast<double>(j); }
};

} // namespace kdv
