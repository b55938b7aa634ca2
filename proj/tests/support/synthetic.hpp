#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mscluster/corpus.hpp"
#include "mscluster/partition.hpp"
#include "mscluster/vectors.hpp"

namespace testsupport {

// 27 groups of 10 nodes, merged 3-into-1 twice. Complete weighted graph.
struct PlantedHierarchy {
    Eigen::SparseMatrix<double> adjacency;
    mscluster::Partition level27, level9, level3;
};

inline PlantedHierarchy planted_hierarchy() {
    const int n = 270;
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double w = 0.01;
            if (i / 10 == j / 10) w = 1.0;
            else if (i / 30 == j / 30) w = 0.3;
            else if (i / 90 == j / 90) w = 0.1;
            trips.emplace_back(i, j, w);
        }
    }
    PlantedHierarchy h;
    h.adjacency.resize(n, n);
    h.adjacency.setFromTriplets(trips.begin(), trips.end());
    std::vector<int> a(n), b(n), c(n);
    for (int i = 0; i < n; ++i) {
        a[i] = i / 10;
        b[i] = i / 30;
        c[i] = i / 90;
    }
    h.level27 = mscluster::Partition(a);
    h.level9 = mscluster::Partition(b);
    h.level3 = mscluster::Partition(c);
    return h;
}

// Random connected weighted graph: a random spanning tree plus extra edges.
inline Eigen::SparseMatrix<double> random_connected_graph(int n, double extra_density, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i));
        a(i, j) = a(j, i) = weight(rng);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (a(i, j) == 0.0 && coin(rng) < extra_density) a(i, j) = a(j, i) = weight(rng);
        }
    }
    return a.sparseView();
}

inline mscluster::Partition random_partition(int n, int max_clusters, std::mt19937_64& rng) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<int>(rng() % static_cast<std::uint64_t>(max_clusters));
    return mscluster::Partition(labels);
}

// Planted-topic corpus: each topic owns a block of words; documents draw
// mostly from their topic and partly from a shared background vocabulary.
struct TopicCorpus {
    std::vector<mscluster::Document> documents;
    std::vector<int> topic;
};

inline TopicCorpus topic_corpus(int docs, int topics, std::uint64_t seed, int words_per_topic = 30,
                                int background_words = 200, int doc_length = 60, double topic_share = 0.35) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    TopicCorpus c;
    for (int d = 0; d < docs; ++d) {
        const int t = d % topics;
        mscluster::Document doc;
        doc.id = "d" + std::to_string(d);
        doc.category = "topic" + std::to_string(t);
        for (int k = 0; k < doc_length; ++k) {
            std::string w;
            if (coin(rng) < topic_share) {
                w = "t" + std::to_string(t) + "w" + std::to_string(rng() % static_cast<std::uint64_t>(words_per_topic));
            } else {
                w = "bg" + std::to_string(rng() % static_cast<std::uint64_t>(background_words));
            }
            doc.tokens.push_back(w);
        }
        doc.raw_text = "";
        for (const auto& w : doc.tokens) doc.raw_text += w + " ";
        c.documents.push_back(std::move(doc));
        c.topic.push_back(t);
    }
    return c;
}

// Planted centroids plus isotropic Gaussian noise.
inline mscluster::VectorSet centroid_embeddings(const TopicCorpus& c, int topics, int dim, double noise,
                                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd centroids(topics, dim);
    for (int t = 0; t < topics; ++t)
        for (int k = 0; k < dim; ++k) centroids(t, k) = g(rng);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(c.documents.size()), dim);
    std::vector<std::string> ids;
    for (std::size_t d = 0; d < c.documents.size(); ++d) {
        for (int k = 0; k < dim; ++k) x(static_cast<Eigen::Index>(d), k) = centroids(c.topic[d], k) + noise * g(rng);
        ids.push_back(c.documents[d].id);
    }
    return mscluster::VectorSet(std::move(ids), std::move(x), mscluster::VectorProvenance::imported);
}

}  // namespace testsupport
