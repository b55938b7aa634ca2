#include "mscluster/louvain.hpp"

#include <numeric>
#include <random>
#include <vector>

#include "mscluster/error.hpp"
#include "mscluster/util.hpp"

namespace mscluster {
namespace {

// One round of local moves on the level matrix. Returns true if any node moved.
bool local_moves(const Eigen::MatrixXd& m, std::vector<int>& comm, std::mt19937_64& rng, double tol) {
    const auto n = static_cast<std::size_t>(m.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    stable_shuffle(order, rng);

    std::vector<std::size_t> csize(n, 1);
    std::vector<double> link(n, 0.0);
    bool moved_any = false;
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i : order) {
            const int from = comm[i];
            std::fill(link.begin(), link.end(), 0.0);
            const auto col = m.col(static_cast<Eigen::Index>(i));
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) link[static_cast<std::size_t>(comm[j])] += col(static_cast<Eigen::Index>(j));
            }
            // Moving i from cluster a to b changes the quality by 2 (K_ib - K_ia).
            const double base = link[static_cast<std::size_t>(from)];
            double best_gain = tol;
            int best = from;
            bool tried_empty = false;
            for (std::size_t c = 0; c < n; ++c) {
                if (static_cast<int>(c) == from) continue;
                double gain;
                if (csize[c] == 0) {
                    if (tried_empty || csize[static_cast<std::size_t>(from)] == 1) continue;
                    tried_empty = true;
                    gain = -2.0 * base;
                } else {
                    gain = 2.0 * (link[c] - base);
                }
                if (gain > best_gain) {
                    best_gain = gain;
                    best = static_cast<int>(c);
                }
            }
            if (best != from) {
                --csize[static_cast<std::size_t>(from)];
                ++csize[static_cast<std::size_t>(best)];
                comm[i] = best;
                improved = true;
                moved_any = true;
            }
        }
    }
    return moved_any;
}

Eigen::MatrixXd aggregate(const Eigen::MatrixXd& m, const Partition& p) {
    const int c = p.num_clusters();
    const Eigen::Index n = m.rows();
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(c, n);
    for (Eigen::Index i = 0; i < n; ++i) rows.row(p[static_cast<std::size_t>(i)]) += m.row(i);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(c, c);
    for (Eigen::Index j = 0; j < n; ++j) out.col(p[static_cast<std::size_t>(j)]) += rows.col(j);
    return 0.5 * (out + out.transpose());
}

}  // namespace

double partition_quality(const Eigen::MatrixXd& quality, const Partition& p) {
    if (static_cast<std::size_t>(quality.rows()) != p.size() || quality.cols() != quality.rows()) {
        throw DimensionError("quality matrix does not match partition size");
    }
    return aggregate(quality, p).trace();
}

Partition louvain(const Eigen::MatrixXd& quality, std::uint64_t seed, const LouvainOptions& opts) {
    const auto n = static_cast<std::size_t>(quality.rows());
    if (quality.cols() != quality.rows()) throw DimensionError("quality matrix must be square");
    if (n == 0) return Partition{};

    std::mt19937_64 rng(seed);
    const double scale = quality.cwiseAbs().maxCoeff();
    const double tol = opts.relative_tolerance * scale;

    std::vector<int> node_cluster(n);
    std::iota(node_cluster.begin(), node_cluster.end(), 0);
    Eigen::MatrixXd level = quality;
    while (level.rows() > 1) {
        std::vector<int> comm(static_cast<std::size_t>(level.rows()));
        std::iota(comm.begin(), comm.end(), 0);
        if (!local_moves(level, comm, rng, tol)) break;
        const Partition merged(comm);
        for (auto& c : node_cluster) c = merged[static_cast<std::size_t>(c)];
        level = aggregate(level, merged);
    }
    Partition result(node_cluster);
    if (!(level.trace() > 0.0)) return Partition::all_in_one(n);
    return result;
}

Partition louvain_optimize(const DiffusionOperator& op, double t, std::uint64_t seed, const LouvainOptions& opts) {
    Partition p = louvain(op.quality_matrix(t), seed, opts);
    p.markov_time = t;
    p.stability = op.stability(p, t);
    if (!(p.stability > 0.0) && p.num_clusters() > 1) {
        p = Partition::all_in_one(op.size());
        p.markov_time = t;
        p.stability = 0.0;
    }
    return p;
}

}  // namespace mscluster
