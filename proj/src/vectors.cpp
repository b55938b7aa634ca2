#include "mscluster/vectors.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "mscluster/error.hpp"
#include "mscluster/util.hpp"

namespace mscluster {

const char* to_string(VectorProvenance p) {
    switch (p) {
    case VectorProvenance::tfidf: return "tfidf";
    case VectorProvenance::imported: return "imported";
    }
    return "unknown";
}

VectorSet::VectorSet(std::vector<std::string> ids, Eigen::MatrixXd values, VectorProvenance provenance)
    : ids_(std::move(ids)), values_(std::move(values)), provenance_(provenance) {
    validate();
}

VectorSet::VectorSet(std::vector<std::string> ids, SparseRowMatrix values, VectorProvenance provenance)
    : ids_(std::move(ids)), values_(std::move(values)), provenance_(provenance) {
    std::get<SparseRowMatrix>(values_).makeCompressed();
    validate();
}

void VectorSet::validate() const {
    const auto rows = std::visit([](const auto& m) { return static_cast<std::size_t>(m.rows()); }, values_);
    if (rows != ids_.size()) {
        throw DimensionError("vector set has " + std::to_string(rows) + " rows for " +
                             std::to_string(ids_.size()) + " ids");
    }
    auto check = [this](double v, std::size_t r) {
        if (!std::isfinite(v)) throw ValidationError("non-finite value in vector '" + ids_[r] + "'");
    };
    if (const auto* d = std::get_if<Eigen::MatrixXd>(&values_)) {
        for (Eigen::Index r = 0; r < d->rows(); ++r) {
            for (Eigen::Index c = 0; c < d->cols(); ++c) check((*d)(r, c), static_cast<std::size_t>(r));
        }
    } else {
        const auto& s = std::get<SparseRowMatrix>(values_);
        for (Eigen::Index r = 0; r < s.outerSize(); ++r) {
            for (SparseRowMatrix::InnerIterator it(s, r); it; ++it) check(it.value(), static_cast<std::size_t>(r));
        }
    }
}

std::size_t VectorSet::dim() const {
    return std::visit([](const auto& m) { return static_cast<std::size_t>(m.cols()); }, values_);
}

const Eigen::MatrixXd& VectorSet::dense() const {
    if (is_sparse()) throw Error("vector set is sparse");
    return std::get<Eigen::MatrixXd>(values_);
}

const SparseRowMatrix& VectorSet::sparse() const {
    if (!is_sparse()) throw Error("vector set is dense");
    return std::get<SparseRowMatrix>(values_);
}

Eigen::MatrixXd VectorSet::to_dense() const {
    if (is_sparse()) return Eigen::MatrixXd(sparse());
    return dense();
}

Eigen::VectorXd VectorSet::row(std::size_t i) const {
    const auto r = static_cast<Eigen::Index>(i);
    if (is_sparse()) return Eigen::VectorXd(sparse().row(r).transpose());
    return dense().row(r).transpose();
}

bool VectorSet::operator==(const VectorSet& other) const {
    if (ids_ != other.ids_ || dim() != other.dim()) return false;
    const Eigen::MatrixXd a = to_dense();
    const Eigen::MatrixXd b = other.to_dense();
    // Bitwise comparison: -0.0 and 0.0 differ, as do NaN payloads (never present).
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (std::signbit(a(r, c)) != std::signbit(b(r, c)) || a(r, c) != b(r, c)) return false;
        }
    }
    return true;
}

VectorSet tfidf_vectorize(std::span<const Document> docs) {
    if (docs.empty()) throw ValidationError("cannot vectorise an empty corpus");

    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        std::map<std::string_view, bool> seen;
        for (const auto& tok : doc.tokens) {
            if (seen.emplace(tok, true).second) ++df[tok];
        }
    }
    std::vector<std::string> vocab;
    std::unordered_map<std::string, Eigen::Index> column;
    std::vector<double> idf;
    vocab.reserve(df.size());
    idf.reserve(df.size());
    const auto n_docs = static_cast<double>(docs.size());
    for (const auto& [term, count] : df) {
        column.emplace(term, static_cast<Eigen::Index>(vocab.size()));
        vocab.push_back(term);
        idf.push_back(std::log(n_docs / static_cast<double>(count)));
    }

    std::vector<std::vector<Eigen::Triplet<double>>> rows(docs.size());
    parallel_for(docs.size(), [&](std::size_t r) {
        std::map<Eigen::Index, double> tf;
        for (const auto& tok : docs[r].tokens) tf[column.at(tok)] += 1.0;
        for (const auto& [c, count] : tf) {
            const double w = count * idf[static_cast<std::size_t>(c)];
            if (w != 0.0) rows[r].emplace_back(static_cast<Eigen::Index>(r), c, w);
        }
    });
    std::vector<Eigen::Triplet<double>> triplets;
    for (auto& r : rows) triplets.insert(triplets.end(), r.begin(), r.end());

    SparseRowMatrix m(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(vocab.size()));
    m.setFromTriplets(triplets.begin(), triplets.end());

    std::vector<std::string> ids;
    ids.reserve(docs.size());
    for (const auto& d : docs) ids.push_back(d.id);
    VectorSet vs(std::move(ids), std::move(m), VectorProvenance::tfidf);
    vs.vocabulary = std::move(vocab);
    return vs;
}

VectorSet import_vectors(std::istream& in, std::span<const std::string> corpus_ids) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError("missing header 'N d'", line_no);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_fields(line);
    double n_val = 0;
    double d_val = 0;
    if (header.size() != 2 || !parse_double(header[0], n_val) || !parse_double(header[1], d_val) ||
        n_val < 1 || d_val < 1 || n_val != std::floor(n_val) || d_val != std::floor(d_val)) {
        throw ParseError("header must be two positive integers 'N d'", line_no);
    }
    const auto n = static_cast<std::size_t>(n_val);
    const auto d = static_cast<std::size_t>(d_val);

    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    ids.reserve(n);
    rows.reserve(n);
    std::unordered_map<std::string, std::size_t> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (rows.size() == n) throw ParseError("more rows than the declared N=" + std::to_string(n), line_no);
        std::string id(fields[0]);
        if (fields.size() - 1 != d) {
            throw DimensionError("line " + std::to_string(line_no) + ": row '" + id + "' has " +
                                 std::to_string(fields.size() - 1) + " values, header declares d=" +
                                 std::to_string(d));
        }
        std::vector<double> values(d);
        for (std::size_t k = 0; k < d; ++k) {
            if (!parse_double(fields[k + 1], values[k])) {
                throw ParseError("row '" + id + "': cannot parse value " + std::string(fields[k + 1]), line_no);
            }
            if (!std::isfinite(values[k])) {
                throw ValidationError("line " + std::to_string(line_no) + ": non-finite value in row '" + id + "'");
            }
        }
        if (!seen.emplace(id, rows.size()).second) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate vector id '" + id + "'");
        }
        ids.push_back(std::move(id));
        rows.push_back(std::move(values));
    }
    if (rows.size() != n) {
        throw ParseError("file has " + std::to_string(rows.size()) + " rows, header declares N=" +
                             std::to_string(n),
                         line_no);
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (!corpus_ids.empty()) {
        std::unordered_map<std::string_view, std::size_t> in_corpus;
        for (std::size_t i = 0; i < corpus_ids.size(); ++i) in_corpus.emplace(corpus_ids[i], i);
        for (const auto& id : ids) {
            if (!in_corpus.contains(id)) throw ValidationError("unknown document id '" + id + "' in vector file");
        }
        order.clear();
        for (const auto& id : corpus_ids) {
            auto it = seen.find(id);
            if (it == seen.end()) throw ValidationError("no vector for document id '" + id + "'");
            order.push_back(it->second);
        }
    }

    Eigen::MatrixXd m(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(d));
    std::vector<std::string> out_ids;
    out_ids.reserve(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& src = rows[order[r]];
        for (std::size_t k = 0; k < d; ++k) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = src[k];
        out_ids.push_back(ids[order[r]]);
    }
    return VectorSet(std::move(out_ids), std::move(m), VectorProvenance::imported);
}

VectorSet import_vectors(const std::filesystem::path& path, std::span<const std::string> corpus_ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vector file " + path.string());
    return import_vectors(in, corpus_ids);
}

void export_vectors(const VectorSet& vs, std::ostream& out) {
    if (vs.dim() == 0) throw ValidationError("cannot export a vector set with dimension 0");
    if (vs.size() == 0) throw ValidationError("cannot export an empty vector set");
    for (const auto& id : vs.ids()) {
        if (id.empty() || id.find_first_of(" \t\r\n") != std::string::npos) {
            throw ValidationError("document id '" + id + "' cannot be written to the vector format");
        }
    }
    const Eigen::MatrixXd m = vs.to_dense();
    std::string buf = std::to_string(vs.size()) + ' ' + std::to_string(vs.dim()) + '\n';
    out << buf;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        buf = vs.ids()[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            buf += ' ';
            buf += format_double(m(r, c));
        }
        buf += '\n';
        out << buf;
    }
    if (!out) throw IoError("failed writing vector file");
}

void export_vectors(const VectorSet& vs, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write vector file " + path.string());
    export_vectors(vs, out);
}

}  // namespace mscluster
