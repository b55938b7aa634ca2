#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mscluster/corpus.hpp"
#include "mscluster/partition.hpp"

namespace mscluster {

// Document-level word statistics over an analysis corpus.
// P(w) = df(w) / N, P(w1 w2) = df(w1 and w2) / N.
class WordStats {
public:
    explicit WordStats(std::span<const Document> docs);

    std::size_t num_documents() const { return num_docs_; }
    bool contains(std::string_view w) const;
    std::size_t document_frequency(std::string_view w) const;
    std::size_t pair_document_frequency(std::string_view w1, std::string_view w2) const;
    double probability(std::string_view w) const;
    // Unsmoothed pair probability.
    double pair_probability(std::string_view w1, std::string_view w2) const;
    std::vector<std::string> vocabulary() const;

private:
    const std::vector<std::size_t>& postings(std::string_view w) const;

    std::size_t num_docs_ = 0;
    std::unordered_map<std::string, std::vector<std::size_t>> postings_;
};

// Natural-log PMI. A pair that never co-occurs gets pair count 1 over N + 1
// documents. Throws ValidationError for a word outside the vocabulary.
double pmi(std::string_view w1, std::string_view w2, const WordStats& stats);

struct ClusterTopWords {
    std::size_t size = 0;
    std::vector<std::string> words;  // by within-cluster term frequency, ties lexicographic
};

std::vector<ClusterTopWords> cluster_top_words(const Partition& p, std::span<const Document> docs,
                                               std::size_t top = 10);

// Size-weighted average over clusters of the median pairwise PMI among each
// cluster's top words. Clusters with fewer than two words count as 0 and add
// a message to `warnings`.
double partition_pmi(const Partition& p, std::span<const Document> docs, const WordStats& stats,
                     std::size_t top = 10, std::vector<std::string>* warnings = nullptr);

// External labels as a partition, keeping the label names.
struct Labelling {
    Partition partition;
    std::vector<std::string> names;  // names[c] for canonical class c
};
Labelling make_labelling(std::span<const std::string> labels);
// Category labels of a corpus; documents without one are labelled "".
Labelling corpus_labelling(std::span<const Document> docs);

// I(C, D) / sqrt(H(C) H(D)), natural log. Two single-class inputs give 1;
// exactly one single-class input gives 0 and a warning.
double nmi(const Partition& c, const Partition& d, std::vector<std::string>* warnings = nullptr);

struct Contingency {
    Eigen::MatrixXd counts;     // clusters x categories
    Eigen::MatrixXd expected;
    Eigen::MatrixXd z;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> zero_variance;
    std::vector<std::size_t> row_sizes;
    std::vector<std::size_t> col_sizes;
};

// Cell z-scores under the fixed-margin (hypergeometric) null.
Contingency zscore_contingency(const Partition& c, const Partition& d);

// Long format: cluster,category,count,expected,z,zero_variance.
void write_contingency_csv(const Contingency& table, const std::filesystem::path& path,
                           const std::vector<std::string>& category_names = {});

struct MetricReport {
    double t = 0.0;
    int num_clusters = 0;
    double stability = 0.0;
    std::optional<double> nmi;
    double pmi = 0.0;
    std::vector<ClusterTopWords> clusters;
    std::vector<std::string> warnings;
};

MetricReport evaluate_partition(const Partition& p, std::span<const Document> docs, const WordStats& stats,
                                std::size_t top_words = 10);
std::string metric_report_json(const MetricReport& report);
MetricReport parse_metric_report(std::string_view json);

}  // namespace mscluster
