#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace kof {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Per-task seed derivation. Every random stream in the library is keyed by
// (base seed, task coordinates) so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys);

// Fills row by row, so a given seed yields the same draws for any storage order.
void fill_standard_normal(Rng& rng, Eigen::MatrixXd& out);

}  // namespace kof
