#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>

#include "mscluster/partition.hpp"
#include "mscluster/simgraph.hpp"

namespace mscluster {

// How P(t) = exp(-t L_RW) is evaluated.
//  spectral: L_RW = D^{-1/2} L_sym D^{1/2}; one eigendecomposition of L_sym
//            is reused for every t.
//  action:   truncated Taylor series with scaling, applied only to the
//            columns that are needed (e.g. the indicator columns of H).
enum class KernelMethod { automatic, spectral, action };

struct OperatorOptions {
    KernelMethod method = KernelMethod::automatic;
    std::size_t spectral_max_nodes = 2000;
    // Largest accepted deviation of P(t) 1 from 1 on the action path.
    double action_tolerance = 1e-8;
};

class DiffusionOperator;

// Precomputed projection of a partition onto the spectral modes, so that
// r(t, H) costs O(N) per time instead of O(N^2).
class StabilityCurve {
public:
    double operator()(double t) const;

private:
    friend class DiffusionOperator;
    const DiffusionOperator* op_ = nullptr;
    Partition partition_;
    Eigen::VectorXd weights_;  // sum_c (H^T W)_{ck}^2 for non-stationary modes k
    double at_zero_ = 0.0;     // r(0, H)
    bool trivial_ = false;
};

// Continuous-time random walk on an undirected, connected, non-negatively
// weighted graph. Immutable; safe to share across threads.
class DiffusionOperator {
public:
    explicit DiffusionOperator(const SimilarityGraph& g, const OperatorOptions& opts = {});
    explicit DiffusionOperator(const Eigen::SparseMatrix<double>& adjacency, const OperatorOptions& opts = {});

    std::size_t size() const { return static_cast<std::size_t>(degree_.size()); }
    const Eigen::VectorXd& degrees() const { return degree_; }
    // pi = d / sum(d)
    const Eigen::VectorXd& stationary() const { return pi_; }
    double volume() const { return volume_; }
    KernelMethod method() const { return method_; }
    // Eigenvalues of L_sym, ascending (spectral path only; empty otherwise).
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

    Eigen::MatrixXd random_walk_laplacian() const;
    // P(t), dense N x N.
    Eigen::MatrixXd transition_matrix(double t) const;
    // B(t) = Pi P(t) - pi pi^T, dense and symmetric.
    Eigen::MatrixXd quality_matrix(double t) const;
    // exp(-t L_RW) X. Throws NumericalError if P(t) 1 deviates from 1 by more
    // than the configured tolerance.
    Eigen::MatrixXd apply_kernel(double t, const Eigen::MatrixXd& x) const;

    // R(t, H) = H^T [Pi P(t) - pi pi^T] H
    Eigen::MatrixXd clustered_autocovariance(const Partition& h, double t) const;
    // r(t, H) = trace R(t, H)
    double stability(const Partition& h, double t) const;
    StabilityCurve stability_curve(const Partition& h) const;

private:
    friend class StabilityCurve;

    void init(const Eigen::SparseMatrix<double>& adjacency, const OperatorOptions& opts);
    Eigen::MatrixXd project(const Partition& h) const;  // H^T W without the stationary mode
    void check_partition(const Partition& h) const;
    static void check_time(double t);

    Eigen::SparseMatrix<double, Eigen::RowMajor> laplacian_;
    Eigen::VectorXd degree_;
    Eigen::VectorXd pi_;
    double volume_ = 0.0;
    KernelMethod method_ = KernelMethod::spectral;
    double action_tolerance_ = 1e-8;

    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd modes_;  // W = D^{1/2} V, columns ordered as eigenvalues_
};

inline DiffusionOperator build_operator(const SimilarityGraph& g, const OperatorOptions& opts = {}) {
    return DiffusionOperator(g, opts);
}

inline Eigen::MatrixXd clustered_autocovariance(const DiffusionOperator& op, const Partition& h, double t) {
    return op.clustered_autocovariance(h, t);
}

inline double stability(const DiffusionOperator& op, const Partition& h, double t) { return op.stability(h, t); }

}  // namespace mscluster
