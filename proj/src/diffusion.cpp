#include "mscluster/diffusion.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mscluster/error.hpp"

namespace mscluster {
namespace {

std::size_t count_components(const Eigen::SparseMatrix<double>& a) {
    const auto n = static_cast<std::size_t>(a.rows());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t components = n;
    for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it) {
            if (it.value() <= 0.0) continue;
            auto x = find(static_cast<std::size_t>(it.row()));
            auto y = find(static_cast<std::size_t>(it.col()));
            if (x != y) {
                parent[x] = y;
                --components;
            }
        }
    }
    return components;
}

}  // namespace

DiffusionOperator::DiffusionOperator(const SimilarityGraph& g, const OperatorOptions& opts) {
    init(g.adjacency(), opts);
}

DiffusionOperator::DiffusionOperator(const Eigen::SparseMatrix<double>& adjacency, const OperatorOptions& opts) {
    init(adjacency, opts);
}

void DiffusionOperator::init(const Eigen::SparseMatrix<double>& adjacency, const OperatorOptions& opts) {
    const Eigen::Index n = adjacency.rows();
    if (adjacency.cols() != n) throw ValidationError("adjacency matrix must be square");
    if (n < 2) throw ValidationError("diffusion operator needs at least 2 nodes");

    Eigen::SparseMatrix<double> a = adjacency;
    a.prune(0.0);
    double max_w = 0.0;
    for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it) {
            if (!std::isfinite(it.value()) || it.value() < 0.0) {
                throw ValidationError("adjacency weights must be finite and non-negative");
            }
            if (it.row() == it.col()) throw ValidationError("self-loops are not allowed");
            max_w = std::max(max_w, it.value());
        }
    }
    const Eigen::SparseMatrix<double> at = a.transpose();
    if ((a - at).cwiseAbs().sum() > 1e-12 * std::max(1.0, max_w) * static_cast<double>(a.nonZeros())) {
        throw ValidationError("adjacency matrix must be symmetric");
    }

    degree_ = a * Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(degree_(i) > 0.0)) throw ValidationError("node " + std::to_string(i) + " has zero degree");
    }
    if (const auto comps = count_components(a); comps != 1) {
        throw ValidationError("graph is disconnected (" + std::to_string(comps) + " components)");
    }
    volume_ = degree_.sum();
    pi_ = degree_ / volume_;

    // L_RW = I - D^{-1} A
    const Eigen::VectorXd inv_d = degree_.cwiseInverse();
    Eigen::SparseMatrix<double, Eigen::RowMajor> walk = inv_d.asDiagonal() * a;
    Eigen::SparseMatrix<double, Eigen::RowMajor> eye(n, n);
    eye.setIdentity();
    laplacian_ = eye - walk;
    action_tolerance_ = opts.action_tolerance;

    method_ = opts.method;
    if (method_ == KernelMethod::automatic) {
        method_ = static_cast<std::size_t>(n) <= opts.spectral_max_nodes ? KernelMethod::spectral : KernelMethod::action;
    }
    if (method_ == KernelMethod::spectral) {
        const Eigen::VectorXd s = degree_.cwiseSqrt();
        const Eigen::VectorXd inv_s = s.cwiseInverse();
        Eigen::MatrixXd lsym = -(inv_s.asDiagonal() * Eigen::MatrixXd(a) * inv_s.asDiagonal());
        lsym.diagonal().array() += 1.0;
        lsym = 0.5 * (lsym + lsym.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lsym);
        if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of L_sym failed", 0.0);
        eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
        modes_ = s.asDiagonal() * eig.eigenvectors();
    }
}

Eigen::MatrixXd DiffusionOperator::random_walk_laplacian() const { return Eigen::MatrixXd(laplacian_); }

void DiffusionOperator::check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("Markov time must be finite and >= 0");
}

void DiffusionOperator::check_partition(const Partition& h) const {
    if (h.size() != size()) {
        throw ValidationError("partition covers " + std::to_string(h.size()) + " nodes, graph has " +
                              std::to_string(size()));
    }
}

Eigen::MatrixXd DiffusionOperator::apply_kernel(double t, const Eigen::MatrixXd& x) const {
    check_time(t);
    if (x.rows() != static_cast<Eigen::Index>(size())) throw DimensionError("kernel operand has wrong row count");
    if (t == 0.0) return x;
    if (method_ == KernelMethod::spectral) {
        // P(t) x = D^{-1} W e^{-t Lambda} W^T x
        const Eigen::VectorXd decay = (-t * eigenvalues_).array().exp();
        Eigen::MatrixXd y = modes_.transpose() * x;
        y = decay.asDiagonal() * y;
        return degree_.cwiseInverse().asDiagonal() * (modes_ * y);
    }
    // Taylor series on steps of length h with ||h L_RW||_inf <= 1; the extra
    // column of ones carries P(t) 1 for the residual check.
    const double norm_inf = [&] {
        double m = 0.0;
        for (Eigen::Index r = 0; r < laplacian_.outerSize(); ++r) {
            double s = 0.0;
            for (decltype(laplacian_)::InnerIterator it(laplacian_, r); it; ++it) s += std::abs(it.value());
            m = std::max(m, s);
        }
        return m;
    }();
    const auto steps = static_cast<long>(std::max(1.0, std::ceil(t * norm_inf)));
    const double h = t / static_cast<double>(steps);
    Eigen::MatrixXd y(x.rows(), x.cols() + 1);
    y.leftCols(x.cols()) = x;
    y.col(x.cols()).setOnes();
    Eigen::MatrixXd term;
    for (long s = 0; s < steps; ++s) {
        term = y;
        Eigen::MatrixXd acc = y;
        for (int j = 1; j <= 60; ++j) {
            term = (-h / j) * (laplacian_ * term);
            acc += term;
            if (term.cwiseAbs().maxCoeff() <= 1e-18 * acc.cwiseAbs().maxCoeff()) break;
        }
        y.swap(acc);
    }
    const double residual = (y.col(x.cols()).array() - 1.0).abs().maxCoeff();
    if (!(residual <= action_tolerance_)) {
        throw NumericalError("exponential action did not reach tolerance at t=" + std::to_string(t), residual);
    }
    return y.leftCols(x.cols());
}

Eigen::MatrixXd DiffusionOperator::transition_matrix(double t) const {
    check_time(t);
    const auto n = static_cast<Eigen::Index>(size());
    if (t == 0.0) return Eigen::MatrixXd::Identity(n, n);
    if (method_ == KernelMethod::spectral) {
        const Eigen::VectorXd decay = (-t * eigenvalues_).array().exp();
        return degree_.cwiseInverse().asDiagonal() * (modes_ * decay.asDiagonal() * modes_.transpose());
    }
    Eigen::MatrixXd p(n, n);
    constexpr Eigen::Index block = 64;
    for (Eigen::Index c = 0; c < n; c += block) {
        const Eigen::Index w = std::min(block, n - c);
        p.middleCols(c, w) = apply_kernel(t, Eigen::MatrixXd::Identity(n, n).middleCols(c, w));
    }
    return p;
}

Eigen::MatrixXd DiffusionOperator::quality_matrix(double t) const {
    check_time(t);
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd b;
    if (t == 0.0) {
        b = -pi_ * pi_.transpose();
        b.diagonal() += pi_;
        return b;
    }
    if (method_ == KernelMethod::spectral) {
        // Pi P(t) - pi pi^T = sum over non-stationary modes of e^{-t l_k} w_k w_k^T / vol
        const Eigen::Index m = n - 1;
        const Eigen::VectorXd decay = (-t * eigenvalues_.tail(m)).array().exp();
        const auto w = modes_.rightCols(m);
        Eigen::MatrixXd scaled = w * (decay / volume_).asDiagonal();
        b.noalias() = scaled * w.transpose();
    } else {
        b = pi_.asDiagonal() * transition_matrix(t);
        b -= pi_ * pi_.transpose();
    }
    return 0.5 * (b + b.transpose());
}

Eigen::MatrixXd DiffusionOperator::project(const Partition& h) const {
    const Eigen::Index m = modes_.cols() - 1;
    Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(h.num_clusters(), m);
    const auto w = modes_.rightCols(m);
    for (std::size_t i = 0; i < h.size(); ++i) proj.row(h[i]) += w.row(static_cast<Eigen::Index>(i));
    return proj;
}

Eigen::MatrixXd DiffusionOperator::clustered_autocovariance(const Partition& h, double t) const {
    check_time(t);
    check_partition(h);
    const int c = h.num_clusters();
    if (c == 1) return Eigen::MatrixXd::Zero(1, 1);

    Eigen::VectorXd mass = Eigen::VectorXd::Zero(c);
    for (std::size_t i = 0; i < h.size(); ++i) mass(h[i]) += pi_(static_cast<Eigen::Index>(i));
    if (t == 0.0) {
        Eigen::MatrixXd r = -mass * mass.transpose();
        r.diagonal() += mass;
        return r;
    }
    if (method_ == KernelMethod::spectral) {
        const Eigen::MatrixXd proj = project(h);
        const Eigen::VectorXd decay = (-t * eigenvalues_.tail(proj.cols())).array().exp() / volume_;
        Eigen::MatrixXd r = proj * decay.asDiagonal() * proj.transpose();
        return 0.5 * (r + r.transpose());
    }
    const Eigen::MatrixXd hm = h.membership();
    const Eigen::MatrixXd ph = apply_kernel(t, hm);
    Eigen::MatrixXd r = hm.transpose() * (pi_.asDiagonal() * ph);
    r -= mass * mass.transpose();
    return r;
}

double DiffusionOperator::stability(const Partition& h, double t) const {
    check_time(t);
    check_partition(h);
    if (h.num_clusters() == 1) return 0.0;
    if (method_ == KernelMethod::spectral) return stability_curve(h)(t);
    return clustered_autocovariance(h, t).trace();
}

StabilityCurve DiffusionOperator::stability_curve(const Partition& h) const {
    check_partition(h);
    StabilityCurve curve;
    curve.op_ = this;
    curve.partition_ = h;
    curve.trivial_ = h.num_clusters() == 1;
    if (curve.trivial_) return curve;
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(h.num_clusters());
    for (std::size_t i = 0; i < h.size(); ++i) mass(h[i]) += pi_(static_cast<Eigen::Index>(i));
    curve.at_zero_ = (mass - mass.cwiseProduct(mass)).sum();
    if (method_ == KernelMethod::spectral) {
        curve.weights_ = project(h).colwise().squaredNorm().transpose() / volume_;
    }
    return curve;
}

double StabilityCurve::operator()(double t) const {
    if (trivial_) return 0.0;
    if (t == 0.0) return at_zero_;
    if (op_->method_ != KernelMethod::spectral) return op_->clustered_autocovariance(partition_, t).trace();
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("Markov time must be finite and >= 0");
    const auto& lambda = op_->eigenvalues_;
    const Eigen::Index m = weights_.size();
    double r = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) r += std::exp(-t * lambda(k + 1)) * weights_(k);
    return r;
}

}  // namespace mscluster
