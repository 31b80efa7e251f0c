#pragma once

#include "osmt/types.hpp"

namespace osmt {

// Euclidean distance between two embeddings of equal dimension.
// Throws std::invalid_argument on dimension mismatch.
double l2_distance(const Embedding& a, const Embedding& b);

}  // namespace osmt
