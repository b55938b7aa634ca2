#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "mscluster/vectors.hpp"

namespace mscluster {

// Normalised similarity S_hat = 1 - D_cos / max(D_cos), with the max taken
// over off-diagonal entries.
struct SimilarityMatrix {
    Eigen::MatrixXd similarity;
    double max_distance = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(similarity.rows()); }
    double distance(std::size_t i, std::size_t j) const {
        return 1.0 - similarity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

struct SimilarityOptions {
    // Largest N for which the dense N x N matrix is materialised.
    std::size_t max_nodes = 20000;
};

SimilarityMatrix cosine_similarity_matrix(const VectorSet& vs, const SimilarityOptions& opts = {});

enum class EdgeSource : std::uint8_t { mst, knn, both };

const char* to_string(EdgeSource s);
EdgeSource edge_source_from_string(std::string_view s);

struct Edge {
    std::uint32_t u;  // u < v
    std::uint32_t v;
    double weight;
    EdgeSource source;

    bool operator==(const Edge&) const = default;
};

class SimilarityGraph {
public:
    SimilarityGraph() = default;
    SimilarityGraph(std::size_t n, std::size_t k, double max_distance, std::vector<Edge> edges);

    std::size_t size() const { return n_; }
    std::size_t k() const { return k_; }
    double max_distance() const { return max_distance_; }
    // Sorted by (u, v).
    const std::vector<Edge>& edges() const { return edges_; }

    Eigen::SparseMatrix<double> adjacency() const;
    Eigen::MatrixXd dense_adjacency() const;
    // Number of connected components counting every edge, zero-weight included.
    std::size_t component_count() const;

private:
    std::size_t n_ = 0;
    std::size_t k_ = 0;
    double max_distance_ = 0.0;
    std::vector<Edge> edges_;
};

// Both give the same tree; automatic uses Kruskal up to 6000 nodes and Prim
// above, where the all-pairs edge list gets too large.
enum class MstAlgorithm { automatic, kruskal, prim };

// Union of the MST of D_hat and each node's k nearest neighbours.
// Ties are broken by (distance, min id, max id).
SimilarityGraph build_mst_knn(const SimilarityMatrix& sm, std::size_t k, MstAlgorithm alg = MstAlgorithm::automatic);

// Edge list: "N k max_distance" header, then "i j weight provenance" lines.
void write_graph(const SimilarityGraph& g, std::ostream& out);
void write_graph(const SimilarityGraph& g, const std::filesystem::path& path);
SimilarityGraph read_graph(std::istream& in);
SimilarityGraph read_graph(const std::filesystem::path& path);

}  // namespace mscluster
