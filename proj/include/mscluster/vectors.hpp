#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mscluster/corpus.hpp"

namespace mscluster {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class VectorProvenance { tfidf, imported };

const char* to_string(VectorProvenance p);

// One row per document, aligned to corpus order. Immutable after construction.
class VectorSet {
public:
    VectorSet() = default;
    VectorSet(std::vector<std::string> ids, Eigen::MatrixXd values, VectorProvenance provenance);
    VectorSet(std::vector<std::string> ids, SparseRowMatrix values, VectorProvenance provenance);

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const;
    bool is_sparse() const { return std::holds_alternative<SparseRowMatrix>(values_); }

    const std::vector<std::string>& ids() const { return ids_; }
    VectorProvenance provenance() const { return provenance_; }

    const Eigen::MatrixXd& dense() const;  // throws if sparse
    const SparseRowMatrix& sparse() const;  // throws if dense
    Eigen::MatrixXd to_dense() const;
    Eigen::VectorXd row(std::size_t i) const;

    // TF-iDF vocabulary (column labels); empty for imported sets.
    std::vector<std::string> vocabulary;

    bool operator==(const VectorSet& other) const;

private:
    void validate() const;

    std::vector<std::string> ids_;
    std::variant<Eigen::MatrixXd, SparseRowMatrix> values_;
    VectorProvenance provenance_ = VectorProvenance::imported;
};

// tf(w,j) * ln(N / df(w)); vocabulary sorted lexicographically.
VectorSet tfidf_vectorize(std::span<const Document> docs);
inline VectorSet tfidf_vectorize(const Corpus& corpus) { return tfidf_vectorize(corpus.documents); }

// Vector interchange format: "N d" header, then N lines "id v1 ... vd".
// With `corpus_ids`, rows are realigned to that order and every id must
// appear exactly once.
VectorSet import_vectors(std::istream& in, std::span<const std::string> corpus_ids = {});
VectorSet import_vectors(const std::filesystem::path& path, std::span<const std::string> corpus_ids = {});

void export_vectors(const VectorSet& vs, std::ostream& out);
void export_vectors(const VectorSet& vs, const std::filesystem::path& path);

}  // namespace mscluster
