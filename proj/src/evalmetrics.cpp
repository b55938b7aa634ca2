#include "mscluster/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "mscluster/error.hpp"
#include "mscluster/util.hpp"

namespace mscluster {

WordStats::WordStats(std::span<const Document> docs) : num_docs_(docs.size()) {
    if (docs.empty()) throw ValidationError("word statistics need at least one document");
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& tok : docs[d].tokens) {
            auto& list = postings_[tok];
            if (list.empty() || list.back() != d) list.push_back(d);
        }
    }
}

bool WordStats::contains(std::string_view w) const { return postings_.find(std::string(w)) != postings_.end(); }

const std::vector<std::size_t>& WordStats::postings(std::string_view w) const {
    const auto it = postings_.find(std::string(w));
    if (it == postings_.end()) throw ValidationError("word not in vocabulary: '" + std::string(w) + "'");
    return it->second;
}

std::size_t WordStats::document_frequency(std::string_view w) const { return postings(w).size(); }

std::size_t WordStats::pair_document_frequency(std::string_view w1, std::string_view w2) const {
    const auto& a = postings(w1);
    const auto& b = postings(w2);
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

double WordStats::probability(std::string_view w) const {
    return static_cast<double>(document_frequency(w)) / static_cast<double>(num_docs_);
}

double WordStats::pair_probability(std::string_view w1, std::string_view w2) const {
    return static_cast<double>(pair_document_frequency(w1, w2)) / static_cast<double>(num_docs_);
}

std::vector<std::string> WordStats::vocabulary() const {
    std::vector<std::string> v;
    v.reserve(postings_.size());
    for (const auto& [w, _] : postings_) v.push_back(w);
    std::sort(v.begin(), v.end());
    return v;
}

double pmi(std::string_view w1, std::string_view w2, const WordStats& stats) {
    const double n = static_cast<double>(stats.num_documents());
    const double p1 = stats.probability(w1);
    const double p2 = stats.probability(w2);
    const std::size_t pair = stats.pair_document_frequency(w1, w2);
    const double p12 = pair == 0 ? 1.0 / (n + 1.0) : static_cast<double>(pair) / n;
    return std::log(p12 / (p1 * p2));
}

namespace {

void check_size(const Partition& p, std::size_t n, const char* what) {
    if (p.size() != n) {
        throw DimensionError(std::string(what) + ": partition covers " + std::to_string(p.size()) + " nodes, expected " +
                             std::to_string(n));
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double entropy(const std::vector<std::size_t>& sizes, double n) {
    std::vector<double> terms;
    for (auto s : sizes) {
        if (s > 0) {
            const double p = static_cast<double>(s) / n;
            terms.push_back(-p * std::log(p));
        }
    }
    std::sort(terms.begin(), terms.end());
    double h = 0.0;
    for (double x : terms) h += x;
    return h;
}

}  // namespace

std::vector<ClusterTopWords> cluster_top_words(const Partition& p, std::span<const Document> docs, std::size_t top) {
    check_size(p, docs.size(), "cluster_top_words");
    std::vector<ClusterTopWords> out(static_cast<std::size_t>(p.num_clusters()));
    std::vector<std::map<std::string, std::size_t>> freq(out.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const auto c = static_cast<std::size_t>(p[d]);
        ++out[c].size;
        for (const auto& tok : docs[d].tokens) ++freq[c][tok];
    }
    for (std::size_t c = 0; c < out.size(); ++c) {
        std::vector<std::pair<std::string, std::size_t>> ranked(freq[c].begin(), freq[c].end());
        // map order is lexicographic, so a stable sort keeps ties that way
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        if (ranked.size() > top) ranked.resize(top);
        for (auto& [w, _] : ranked) out[c].words.push_back(std::move(w));
    }
    return out;
}

double partition_pmi(const Partition& p, std::span<const Document> docs, const WordStats& stats, std::size_t top,
                     std::vector<std::string>* warnings) {
    const auto clusters = cluster_top_words(p, docs, top);
    const double n = static_cast<double>(docs.size());
    double total = 0.0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const auto& words = clusters[c].words;
        if (words.size() < 2) {
            if (warnings) warnings->push_back("cluster " + std::to_string(c) + " has fewer than two words; PMI taken as 0");
            continue;
        }
        std::vector<double> scores;
        for (std::size_t k = 0; k < words.size(); ++k) {
            for (std::size_t l = k + 1; l < words.size(); ++l) scores.push_back(pmi(words[k], words[l], stats));
        }
        total += static_cast<double>(clusters[c].size) / n * median(std::move(scores));
    }
    return total;
}

Labelling make_labelling(std::span<const std::string> labels) {
    std::map<std::string, int, std::less<>> index;
    std::vector<int> raw;
    raw.reserve(labels.size());
    Labelling out;
    for (const auto& l : labels) {
        auto [it, inserted] = index.try_emplace(l, static_cast<int>(index.size()));
        if (inserted) out.names.push_back(l);
        raw.push_back(it->second);
    }
    out.partition = Partition(raw);
    return out;
}

Labelling corpus_labelling(std::span<const Document> docs) {
    std::vector<std::string> labels;
    labels.reserve(docs.size());
    for (const auto& d : docs) labels.push_back(d.category.value_or(""));
    return make_labelling(labels);
}

double nmi(const Partition& c, const Partition& d, std::vector<std::string>* warnings) {
    if (c.size() != d.size()) throw DimensionError("nmi: partitions cover different node sets");
    if (c.size() == 0) throw ValidationError("nmi: empty partitions");
    const bool c_single = c.num_clusters() == 1;
    const bool d_single = d.num_clusters() == 1;
    if (c_single && d_single) return 1.0;
    if (c_single || d_single) {
        if (warnings) warnings->push_back("nmi: one side has a single class; returning 0");
        return 0.0;
    }
    const double n = static_cast<double>(c.size());
    std::map<std::pair<int, int>, std::size_t> joint;
    for (std::size_t i = 0; i < c.size(); ++i) ++joint[{c[i], d[i]}];
    const auto sc = c.cluster_sizes();
    const auto sd = d.cluster_sizes();
    std::vector<double> terms;
    terms.reserve(joint.size());
    for (const auto& [cell, count] : joint) {
        const double nij = static_cast<double>(count);
        const double ratio = nij * n / (static_cast<double>(sc[static_cast<std::size_t>(cell.first)]) *
                                        static_cast<double>(sd[static_cast<std::size_t>(cell.second)]));
        terms.push_back(nij / n * std::log(ratio));
    }
    std::sort(terms.begin(), terms.end());
    double mi = 0.0;
    for (double x : terms) mi += x;
    const double hc = entropy(sc, n);
    const double hd = entropy(sd, n);
    const double v = mi / std::sqrt(hc * hd);
    return std::clamp(v, 0.0, 1.0);
}

Contingency zscore_contingency(const Partition& c, const Partition& d) {
    if (c.size() != d.size()) throw DimensionError("zscore_contingency: partitions cover different node sets");
    if (c.size() == 0) throw ValidationError("zscore_contingency: empty partitions");
    const auto rows = static_cast<Eigen::Index>(c.num_clusters());
    const auto cols = static_cast<Eigen::Index>(d.num_clusters());
    Contingency t;
    t.counts = Eigen::MatrixXd::Zero(rows, cols);
    for (std::size_t i = 0; i < c.size(); ++i) t.counts(c[i], d[i]) += 1.0;
    t.row_sizes = c.cluster_sizes();
    t.col_sizes = d.cluster_sizes();
    t.expected.resize(rows, cols);
    t.z.resize(rows, cols);
    t.zero_variance.resize(rows, cols);
    const double n = static_cast<double>(c.size());
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double nc = static_cast<double>(t.row_sizes[static_cast<std::size_t>(r)]);
        for (Eigen::Index k = 0; k < cols; ++k) {
            const double nd = static_cast<double>(t.col_sizes[static_cast<std::size_t>(k)]);
            const double e = nc * nd / n;
            const double var = n > 1.0 ? e * (1.0 - nc / n) * (n - nd) / (n - 1.0) : 0.0;
            t.expected(r, k) = e;
            t.zero_variance(r, k) = !(var > 0.0);
            t.z(r, k) = var > 0.0 ? (t.counts(r, k) - e) / std::sqrt(var) : 0.0;
        }
    }
    return t;
}

void write_contingency_csv(const Contingency& table, const std::filesystem::path& path,
                           const std::vector<std::string>& category_names) {
    if (!category_names.empty() && static_cast<Eigen::Index>(category_names.size()) != table.counts.cols()) {
        throw DimensionError("category names do not match contingency columns");
    }
    std::string out = "cluster,category,count,expected,z,zero_variance\n";
    for (Eigen::Index r = 0; r < table.counts.rows(); ++r) {
        for (Eigen::Index k = 0; k < table.counts.cols(); ++k) {
            std::string name = category_names.empty() ? std::to_string(k) : category_names[static_cast<std::size_t>(k)];
            if (name.find_first_of(",\"\n") != std::string::npos) {
                std::string quoted = "\"";
                for (char ch : name) {
                    if (ch == '"') quoted += '"';
                    quoted += ch;
                }
                name = quoted + "\"";
            }
            out += std::to_string(r) + ',' + name + ',' + std::to_string(static_cast<long long>(table.counts(r, k))) +
                   ',' + format_double(table.expected(r, k)) + ',' + format_double(table.z(r, k)) + ',' +
                   (table.zero_variance(r, k) ? "1" : "0") + '\n';
        }
    }
    write_file(path, out);
}

MetricReport evaluate_partition(const Partition& p, std::span<const Document> docs, const WordStats& stats,
                                std::size_t top_words) {
    MetricReport r;
    r.t = p.markov_time;
    r.num_clusters = p.num_clusters();
    r.stability = p.stability;
    r.clusters = cluster_top_words(p, docs, top_words);
    r.pmi = partition_pmi(p, docs, stats, top_words, &r.warnings);
    const bool labelled = std::all_of(docs.begin(), docs.end(), [](const Document& d) { return d.category.has_value(); });
    if (labelled) r.nmi = nmi(p, corpus_labelling(docs).partition, &r.warnings);
    return r;
}

namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double number_from(const nlohmann::json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

}  // namespace

std::string metric_report_json(const MetricReport& report) {
    nlohmann::json j;
    j["t"] = number(report.t);
    j["C"] = report.num_clusters;
    j["stability"] = number(report.stability);
    j["NMI"] = report.nmi ? number(*report.nmi) : nlohmann::json(nullptr);
    j["PMI"] = number(report.pmi);
    j["pmi_probabilities"] = "document-level frequencies over the analysis corpus";
    auto& clusters = j["clusters"] = nlohmann::json::array();
    for (std::size_t c = 0; c < report.clusters.size(); ++c) {
        clusters.push_back({{"id", c}, {"size", report.clusters[c].size}, {"top_words", report.clusters[c].words}});
    }
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

MetricReport parse_metric_report(std::string_view text) {
    MetricReport r;
    try {
        const auto j = nlohmann::json::parse(text);
        r.t = number_from(j.at("t"));
        r.num_clusters = j.at("C").get<int>();
        r.stability = number_from(j.at("stability"));
        if (!j.at("NMI").is_null()) r.nmi = j.at("NMI").get<double>();
        r.pmi = number_from(j.at("PMI"));
        for (const auto& c : j.at("clusters")) {
            r.clusters.push_back({c.at("size").get<std::size_t>(), c.at("top_words").get<std::vector<std::string>>()});
        }
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid metric report: ") + e.what());
    }
    return r;
}

}  // namespace mscluster
