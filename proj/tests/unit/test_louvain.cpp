#include <doctest.h>

#include <random>

#include "mscluster/louvain.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace mscluster;

namespace {

Eigen::SparseMatrix<double> barbell() {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(8, 8);
    for (int block : {0, 4}) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (i != j) a(block + i, block + j) = 1.0;
    }
    a(3, 4) = a(4, 3) = 1.0;
    return a.sparseView();
}

}  // namespace

TEST_CASE("louvain finds the exhaustive optimum on small graphs") {
    const DiffusionOperator op(barbell());
    for (double t : {0.5, 1.0, 3.0}) {
        const Eigen::MatrixXd b = op.quality_matrix(t);
        double best = -1e300;
        testsupport::for_each_partition(8, [&](const std::vector<int>& labels) {
            best = std::max(best, partition_quality(b, Partition(labels)));
        });
        const Partition p = louvain_optimize(op, t, 1);
        CHECK(p.stability == doctest::Approx(best).epsilon(1e-12));
        CHECK(p.markov_time == t);
    }
    const Partition split = louvain_optimize(op, 1.0, 3);
    CHECK(split == Partition(std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1}));
}

TEST_CASE("louvain on random graphs: deterministic, non-negative, near exhaustive") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 5);
        const DiffusionOperator op(testsupport::random_connected_graph(n, 0.3, rng));
        const double t = 0.5 + static_cast<double>(trial);
        const Eigen::MatrixXd b = op.quality_matrix(t);
        double best = 0.0;
        testsupport::for_each_partition(n, [&](const std::vector<int>& labels) {
            best = std::max(best, partition_quality(b, Partition(labels)));
        });
        double best_run = -1.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Partition p = louvain(b, seed);
            CHECK(p == louvain(b, seed));
            const double q = partition_quality(b, p);
            CHECK(q >= -1e-14);
            CHECK(q <= best + 1e-12);
            best_run = std::max(best_run, q);
        }
        CHECK(best_run >= best - 1e-9 * std::max(1.0, best));
    }
}

TEST_CASE("partition quality equals trace of clustered autocovariance") {
    std::mt19937_64 rng(5);
    const DiffusionOperator op(testsupport::random_connected_graph(15, 0.2, rng));
    const Partition h = testsupport::random_partition(15, 4, rng);
    CHECK(partition_quality(op.quality_matrix(2.0), h) == doctest::Approx(op.stability(h, 2.0)).epsilon(1e-12));
}

TEST_CASE("nothing to gain gives the all-in-one partition") {
    const Eigen::MatrixXd b = -Eigen::MatrixXd::Ones(5, 5);
    CHECK(louvain(b, 0).num_clusters() == 1);
}

TEST_CASE("planted hierarchy levels at characteristic times") {
    const auto h = testsupport::planted_hierarchy();
    const DiffusionOperator op(h.adjacency);
    CHECK(louvain_optimize(op, 0.05, 1).num_clusters() == 270);
    CHECK(louvain_optimize(op, 0.2, 1) == h.level27);
    CHECK(louvain_optimize(op, 1.0, 1) == h.level9);
    CHECK(louvain_optimize(op, 10.0, 1) == h.level3);
}
