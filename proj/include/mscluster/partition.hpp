#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace mscluster {

// Assignment of N nodes to C clusters. Labels are canonicalised on
// construction (numbered by first appearance), so two partitions that differ
// only by a relabelling compare equal and indices are always contiguous.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::span<const int> labels);
    explicit Partition(const std::vector<int>& labels) : Partition(std::span<const int>(labels)) {}

    static Partition singletons(std::size_t n);
    static Partition all_in_one(std::size_t n);

    std::size_t size() const { return assignment_.size(); }
    int num_clusters() const { return num_clusters_; }
    const std::vector<int>& assignment() const { return assignment_; }
    int operator[](std::size_t node) const { return assignment_[node]; }

    std::vector<std::size_t> cluster_sizes() const;
    std::vector<std::vector<std::size_t>> members() const;
    // N x C binary membership matrix.
    Eigen::MatrixXd membership() const;

    bool operator==(const Partition& o) const { return assignment_ == o.assignment_; }

    // Metadata: Markov time at which it was found and its stability there.
    double markov_time = std::numeric_limits<double>::quiet_NaN();
    double stability = std::numeric_limits<double>::quiet_NaN();

private:
    std::vector<int> assignment_;
    int num_clusters_ = 0;
};

struct VariationOfInformation {
    double vi = 0.0;          // natural log
    double normalized = 0.0;  // vi / log N (0 when N == 1)
};

// VI = H(A) + H(B) - 2 I(A, B) with empirical cluster proportions.
VariationOfInformation variation_of_information(const Partition& a, const Partition& b);

}  // namespace mscluster
