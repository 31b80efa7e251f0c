#include <cmath>
#include <stdexcept>

#include "osmt/distance.hpp"
#include "osmt/types.hpp"

namespace osmt {

bool is_finite(const Embedding& e) {
    for (double x : e) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double l2_distance(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("l2_distance: dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

}  // namespace osmt
