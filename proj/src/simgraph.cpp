#include "mscluster/simgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <tuple>

#include "mscluster/error.hpp"
#include "mscluster/util.hpp"

namespace mscluster {

const char* to_string(EdgeSource s) {
    switch (s) {
    case EdgeSource::mst: return "mst";
    case EdgeSource::knn: return "knn";
    case EdgeSource::both: return "both";
    }
    return "?";
}

EdgeSource edge_source_from_string(std::string_view s) {
    if (s == "mst") return EdgeSource::mst;
    if (s == "knn") return EdgeSource::knn;
    if (s == "both") return EdgeSource::both;
    throw ValidationError("unknown edge provenance '" + std::string(s) + "'");
}

SimilarityMatrix cosine_similarity_matrix(const VectorSet& vs, const SimilarityOptions& opts) {
    const std::size_t n = vs.size();
    if (n == 0) throw ValidationError("empty vector set");
    if (n > opts.max_nodes) {
        throw ValidationError("N=" + std::to_string(n) + " exceeds the dense similarity ceiling of " +
                              std::to_string(opts.max_nodes) + "; a streaming kNN mode is not supported");
    }
    if (vs.dim() == 0) throw ValidationError("vector set has dimension 0");

    Eigen::MatrixXd gram;
    Eigen::VectorXd norms(static_cast<Eigen::Index>(n));
    // Unit-normalised rows, kept for exact duplicate detection.
    Eigen::MatrixXd unit;
    SparseRowMatrix x;
    if (vs.is_sparse()) {
        x = vs.sparse();
        for (Eigen::Index r = 0; r < x.outerSize(); ++r) norms(r) = x.row(r).norm();
        for (Eigen::Index r = 0; r < x.outerSize(); ++r) {
            if (norms(r) == 0.0) continue;
            for (SparseRowMatrix::InnerIterator it(x, r); it; ++it) it.valueRef() /= norms(r);
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (norms(static_cast<Eigen::Index>(r)) == 0.0) {
                throw ValidationError("document '" + vs.ids()[r] + "' has an all-zero vector; cosine is undefined");
            }
        }
        gram = Eigen::MatrixXd(x * x.transpose());
    } else {
        unit = vs.dense();
        norms = unit.rowwise().norm();
        for (std::size_t r = 0; r < n; ++r) {
            if (norms(static_cast<Eigen::Index>(r)) == 0.0) {
                throw ValidationError("document '" + vs.ids()[r] + "' has an all-zero vector; cosine is undefined");
            }
        }
        unit = norms.cwiseInverse().asDiagonal() * unit;
        gram.noalias() = unit * unit.transpose();
    }

    auto same_row = [&](Eigen::Index i, Eigen::Index j) {
        if (!vs.is_sparse()) return unit.row(i) == unit.row(j);
        SparseRowMatrix::InnerIterator a(x, i);
        SparseRowMatrix::InnerIterator b(x, j);
        for (; a && b; ++a, ++b) {
            if (a.index() != b.index() || a.value() != b.value()) return false;
        }
        return !a && !b;
    };

    // D_cos = 1 - S_cos, clamped to the valid range [0, 2], computed in place.
    Eigen::MatrixXd& dist = gram;
    double max_d = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
        for (Eigen::Index i = j + 1; i < static_cast<Eigen::Index>(n); ++i) {
            const double s = 0.5 * (gram(i, j) + gram(j, i));
            double d = std::clamp(1.0 - s, 0.0, 2.0);
            if (d < 1e-12 && same_row(i, j)) d = 0.0;
            dist(i, j) = d;
            dist(j, i) = d;
            max_d = std::max(max_d, d);
        }
        dist(j, j) = 0.0;
    }
    unit.resize(0, 0);
    x.resize(0, 0);
    if (n >= 2 && max_d == 0.0) {
        throw ValidationError("degenerate corpus: all pairwise distances are zero, normalisation undefined");
    }

    SimilarityMatrix sm;
    sm.max_distance = max_d;
    sm.similarity = std::move(gram);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
            sm.similarity(i, j) = i == j ? 1.0 : 1.0 - sm.similarity(i, j) / max_d;
        }
    }
    return sm;
}

SimilarityGraph::SimilarityGraph(std::size_t n, std::size_t k, double max_distance, std::vector<Edge> edges)
    : n_(n), k_(k), max_distance_(max_distance), edges_(std::move(edges)) {
    for (auto& e : edges_) {
        if (e.u == e.v) throw ValidationError("self-loop on node " + std::to_string(e.u));
        if (e.u > e.v) std::swap(e.u, e.v);
        if (e.v >= n_) throw ValidationError("edge endpoint out of range");
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) throw ValidationError("edge weight must be finite and >= 0");
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    for (std::size_t i = 1; i < edges_.size(); ++i) {
        if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
            throw ValidationError("duplicate edge " + std::to_string(edges_[i].u) + "-" + std::to_string(edges_[i].v));
        }
    }
}

Eigen::SparseMatrix<double> SimilarityGraph::adjacency() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * edges_.size());
    for (const auto& e : edges_) {
        t.emplace_back(e.u, e.v, e.weight);
        t.emplace_back(e.v, e.u, e.weight);
    }
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

Eigen::MatrixXd SimilarityGraph::dense_adjacency() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (const auto& e : edges_) {
        a(e.u, e.v) = e.weight;
        a(e.v, e.u) = e.weight;
    }
    return a;
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::uint8_t> rank_;
};

struct Candidate {
    double distance;
    std::uint32_t u;
    std::uint32_t v;

    bool operator<(const Candidate& o) const { return std::tie(distance, u, v) < std::tie(o.distance, o.u, o.v); }
};

// Kruskal over all pairs. Keys (distance, min id, max id) are distinct, so the
// tree is unique; above kKruskalMaxNodes the all-pairs edge list would not fit
// comfortably and Prim over the same keys is used, which yields the same tree.
constexpr std::size_t kKruskalMaxNodes = 6000;

std::vector<std::pair<std::uint32_t, std::uint32_t>> minimum_spanning_tree(const SimilarityMatrix& sm, MstAlgorithm alg) {
    const auto n = static_cast<std::uint32_t>(sm.size());
    std::vector<std::pair<std::uint32_t, std::uint32_t>> tree;
    tree.reserve(n - 1);
    const bool kruskal = alg == MstAlgorithm::kruskal || (alg == MstAlgorithm::automatic && n <= kKruskalMaxNodes);
    if (kruskal) {
        std::vector<Candidate> pairs;
        pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
        for (std::uint32_t u = 0; u < n; ++u) {
            for (std::uint32_t v = u + 1; v < n; ++v) pairs.push_back({sm.distance(u, v), u, v});
        }
        std::sort(pairs.begin(), pairs.end());
        DisjointSets ds(n);
        for (const auto& c : pairs) {
            if (ds.unite(c.u, c.v)) {
                tree.emplace_back(c.u, c.v);
                if (tree.size() == n - 1u) break;
            }
        }
        return tree;
    }
    std::vector<bool> in_tree(n, false);
    std::vector<Candidate> best(n);
    in_tree[0] = true;
    for (std::uint32_t v = 1; v < n; ++v) best[v] = {sm.distance(0, v), 0, v};
    for (std::uint32_t step = 1; step < n; ++step) {
        std::uint32_t pick = n;
        for (std::uint32_t v = 0; v < n; ++v) {
            if (!in_tree[v] && (pick == n || best[v] < best[pick])) pick = v;
        }
        in_tree[pick] = true;
        tree.emplace_back(best[pick].u, best[pick].v);
        for (std::uint32_t v = 0; v < n; ++v) {
            if (in_tree[v]) continue;
            const Candidate c{sm.distance(pick, v), std::min(pick, v), std::max(pick, v)};
            if (c < best[v]) best[v] = c;
        }
    }
    return tree;
}

}  // namespace

std::size_t SimilarityGraph::component_count() const {
    DisjointSets ds(n_);
    std::size_t components = n_;
    for (const auto& e : edges_) {
        if (ds.unite(e.u, e.v)) --components;
    }
    return components;
}

SimilarityGraph build_mst_knn(const SimilarityMatrix& sm, std::size_t k, MstAlgorithm alg) {
    const std::size_t n = sm.size();
    if (n < 2) throw ValidationError("MST-kNN needs at least 2 nodes");
    if (k >= n) {
        throw ValidationError("k=" + std::to_string(k) + " must be smaller than N=" + std::to_string(n));
    }

    auto tree = minimum_spanning_tree(sm, alg);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> knn;
    if (k > 0) {
        knn.reserve(n * k);
        std::vector<Candidate> row(n - 1);
        for (std::uint32_t i = 0; i < n; ++i) {
            std::size_t idx = 0;
            for (std::uint32_t j = 0; j < n; ++j) {
                if (j == i) continue;
                row[idx++] = {sm.distance(i, j), std::min(i, j), std::max(i, j)};
            }
            std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
            for (std::size_t r = 0; r < k; ++r) knn.emplace_back(row[r].u, row[r].v);
        }
    }

    std::sort(tree.begin(), tree.end());
    std::sort(knn.begin(), knn.end());
    knn.erase(std::unique(knn.begin(), knn.end()), knn.end());

    std::vector<Edge> edges;
    edges.reserve(tree.size() + knn.size());
    auto weight = [&](std::uint32_t u, std::uint32_t v) {
        return sm.similarity(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
    };
    std::size_t a = 0;
    std::size_t b = 0;
    while (a < tree.size() || b < knn.size()) {
        if (b == knn.size() || (a < tree.size() && tree[a] < knn[b])) {
            edges.push_back({tree[a].first, tree[a].second, weight(tree[a].first, tree[a].second), EdgeSource::mst});
            ++a;
        } else if (a == tree.size() || knn[b] < tree[a]) {
            edges.push_back({knn[b].first, knn[b].second, weight(knn[b].first, knn[b].second), EdgeSource::knn});
            ++b;
        } else {
            edges.push_back({tree[a].first, tree[a].second, weight(tree[a].first, tree[a].second), EdgeSource::both});
            ++a;
            ++b;
        }
    }
    return SimilarityGraph(n, k, sm.max_distance, std::move(edges));
}

void write_graph(const SimilarityGraph& g, std::ostream& out) {
    out << g.size() << ' ' << g.k() << ' ' << format_double(g.max_distance()) << '\n';
    for (const auto& e : g.edges()) {
        out << e.u << ' ' << e.v << ' ' << format_double(e.weight) << ' ' << to_string(e.source) << '\n';
    }
    if (!out) throw IoError("failed writing graph");
}

void write_graph(const SimilarityGraph& g, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write graph " + path.string());
    write_graph(g, out);
}

SimilarityGraph read_graph(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError("missing graph header", line_no);
    auto head = split_fields(line);
    double n = 0;
    double k = 0;
    double max_d = 0;
    if (head.size() != 3 || !parse_double(head[0], n) || !parse_double(head[1], k) || !parse_double(head[2], max_d) ||
        n < 0 || k < 0 || n != std::floor(n) || k != std::floor(k)) {
        throw ParseError("graph header must be 'N k max_distance'", line_no);
    }
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        auto f = split_fields(line);
        if (f.empty()) continue;
        double u = 0;
        double v = 0;
        double w = 0;
        if (f.size() != 4 || !parse_double(f[0], u) || !parse_double(f[1], v) || !parse_double(f[2], w) ||
            u < 0 || v < 0 || u != std::floor(u) || v != std::floor(v)) {
            throw ParseError("edge line must be 'i j weight provenance'", line_no);
        }
        edges.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v), w, edge_source_from_string(f[3])});
    }
    return SimilarityGraph(static_cast<std::size_t>(n), static_cast<std::size_t>(k), max_d, std::move(edges));
}

SimilarityGraph read_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open graph " + path.string());
    return read_graph(in);
}

}  // namespace mscluster
