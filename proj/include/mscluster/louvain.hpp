#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mscluster/diffusion.hpp"
#include "mscluster/partition.hpp"

namespace mscluster {

struct LouvainOptions {
    // A move must improve the quality by more than this fraction of max |B_ij|.
    double relative_tolerance = 1e-12;
};

// Sum of B_ij over pairs (i, j) in the same cluster, i.e. trace(H^T B H).
double partition_quality(const Eigen::MatrixXd& quality, const Partition& p);

// Louvain (local moves + aggregation) maximising trace(H^T B H) for a dense
// symmetric quality matrix B. Node order is shuffled by `seed`; equal-gain
// moves go to the lowest cluster index. If no partition scores above zero the
// all-in-one partition is returned.
Partition louvain(const Eigen::MatrixXd& quality, std::uint64_t seed, const LouvainOptions& opts = {});

// Louvain on B(t) = Pi P(t) - pi pi^T. The result carries t and r(t, H).
Partition louvain_optimize(const DiffusionOperator& op, double t, std::uint64_t seed,
                           const LouvainOptions& opts = {});

}  // namespace mscluster
