#include "mscluster/partition.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mscluster/error.hpp"

namespace mscluster {

Partition::Partition(std::span<const int> labels) {
    std::unordered_map<int, int> remap;
    assignment_.reserve(labels.size());
    for (int l : labels) {
        auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
        assignment_.push_back(it->second);
    }
    num_clusters_ = static_cast<int>(remap.size());
}

Partition Partition::singletons(std::size_t n) {
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = static_cast<int>(i);
    return Partition(l);
}

Partition Partition::all_in_one(std::size_t n) { return Partition(std::vector<int>(n, 0)); }

std::vector<std::size_t> Partition::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(num_clusters_), 0);
    for (int c : assignment_) ++sizes[static_cast<std::size_t>(c)];
    return sizes;
}

std::vector<std::vector<std::size_t>> Partition::members() const {
    std::vector<std::vector<std::size_t>> m(static_cast<std::size_t>(num_clusters_));
    for (std::size_t i = 0; i < assignment_.size(); ++i) m[static_cast<std::size_t>(assignment_[i])].push_back(i);
    return m;
}

Eigen::MatrixXd Partition::membership() const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size()), num_clusters_);
    for (std::size_t i = 0; i < assignment_.size(); ++i) h(static_cast<Eigen::Index>(i), assignment_[i]) = 1.0;
    return h;
}

VariationOfInformation variation_of_information(const Partition& a, const Partition& b) {
    if (a.size() != b.size()) {
        throw ValidationError("partitions cover different node sets (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + " nodes)");
    }
    const std::size_t n = a.size();
    if (n == 0) return {};
    if (a == b) return {};

    const auto ca = static_cast<std::size_t>(a.num_clusters());
    std::unordered_map<std::size_t, std::size_t> joint;
    for (std::size_t i = 0; i < n; ++i) {
        ++joint[static_cast<std::size_t>(b[i]) * ca + static_cast<std::size_t>(a[i])];
    }
    const auto sa = a.cluster_sizes();
    const auto sb = b.cluster_sizes();
    const double nn = static_cast<double>(n);
    // VI = -sum_ij p_ij [log(p_ij / p_i) + log(p_ij / p_j)]. Terms are summed
    // in sorted order so that swapping the arguments gives a bitwise equal result.
    std::vector<double> terms;
    terms.reserve(joint.size());
    for (const auto& [key, count] : joint) {
        const double nij = static_cast<double>(count);
        const double ni = static_cast<double>(sa[key % ca]);
        const double nj = static_cast<double>(sb[key / ca]);
        terms.push_back(-(nij / nn) * (std::log(nij / ni) + std::log(nij / nj)));
    }
    std::sort(terms.begin(), terms.end());
    double vi = 0.0;
    for (double t : terms) vi += t;
    vi = std::max(vi, 0.0);
    return {vi, n > 1 ? vi / std::log(nn) : 0.0};
}

}  // namespace mscluster
