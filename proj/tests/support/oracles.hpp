#pragma once

// Independent reference implementations used to check the library.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace testsupport {

// exp(M) by Taylor series with scaling and squaring.
inline Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& m, int terms = 40) {
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    while (norm / std::ldexp(1.0, squarings) > 0.25) ++squarings;
    const Eigen::MatrixXd a = m / std::ldexp(1.0, squarings);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    Eigen::MatrixXd sum = term;
    for (int k = 1; k <= terms; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

struct DenseMarkov {
    Eigen::MatrixXd laplacian;  // I - D^-1 A
    Eigen::VectorXd pi;
};

inline DenseMarkov dense_markov(const Eigen::MatrixXd& a) {
    const Eigen::VectorXd d = a.rowwise().sum();
    DenseMarkov out;
    out.laplacian = Eigen::MatrixXd::Identity(a.rows(), a.cols()) - d.cwiseInverse().asDiagonal() * a;
    out.pi = d / d.sum();
    return out;
}

inline Eigen::MatrixXd oracle_transition(const Eigen::MatrixXd& a, double t) {
    return taylor_expm(-t * dense_markov(a).laplacian);
}

inline Eigen::MatrixXd oracle_autocovariance(const Eigen::MatrixXd& a, const std::vector<int>& labels, double t) {
    const DenseMarkov mk = dense_markov(a);
    const Eigen::MatrixXd p = taylor_expm(-t * mk.laplacian);
    const Eigen::MatrixXd b = mk.pi.asDiagonal() * p - mk.pi * mk.pi.transpose();
    const int c = *std::max_element(labels.begin(), labels.end()) + 1;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(a.rows(), c);
    for (std::size_t i = 0; i < labels.size(); ++i) h(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    return h.transpose() * b * h;
}

inline double oracle_stability(const Eigen::MatrixXd& a, const std::vector<int>& labels, double t) {
    return oracle_autocovariance(a, labels, t).trace();
}

// Calls fn(labels) for every set partition of n nodes (restricted growth strings).
inline void for_each_partition(int n, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    std::vector<int> maxv(static_cast<std::size_t>(n), 0);
    while (true) {
        fn(a);
        int i = n - 1;
        while (i > 0 && a[static_cast<std::size_t>(i)] == maxv[static_cast<std::size_t>(i - 1)] + 1) --i;
        if (i <= 0) return;
        ++a[static_cast<std::size_t>(i)];
        const int top = std::max(maxv[static_cast<std::size_t>(i - 1)], a[static_cast<std::size_t>(i)]);
        maxv[static_cast<std::size_t>(i)] = top;
        for (int j = i + 1; j < n; ++j) {
            a[static_cast<std::size_t>(j)] = 0;
            maxv[static_cast<std::size_t>(j)] = top;
        }
    }
}

// Minimum total weight over all spanning trees of the complete graph with the
// given symmetric weights, by decoding every Pruefer sequence.
inline double brute_force_mst_weight(const Eigen::MatrixXd& w) {
    const int n = static_cast<int>(w.rows());
    if (n == 1) return 0.0;
    if (n == 2) return w(0, 1);
    const int len = n - 2;
    std::vector<int> seq(static_cast<std::size_t>(len), 0);
    std::vector<int> degree(static_cast<std::size_t>(n));
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::fill(degree.begin(), degree.end(), 1);
        for (int x : seq) ++degree[static_cast<std::size_t>(x)];
        double total = 0.0;
        int ptr = 0;
        while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
        int leaf = ptr;
        for (int x : seq) {
            total += w(leaf, x);
            if (--degree[static_cast<std::size_t>(x)] == 1 && x < ptr) {
                leaf = x;
            } else {
                ++ptr;
                while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
                leaf = ptr;
            }
        }
        total += w(leaf, n - 1);
        best = std::min(best, total);
        int i = len - 1;
        while (i >= 0 && seq[static_cast<std::size_t>(i)] == n - 1) seq[static_cast<std::size_t>(i--)] = 0;
        if (i < 0) break;
        ++seq[static_cast<std::size_t>(i)];
    }
    return best;
}

// Plain-definition VI from the joint distribution, unsorted summation.
inline double naive_vi(const std::vector<int>& a, const std::vector<int>& b) {
    const double n = static_cast<double>(a.size());
    const int ca = *std::max_element(a.begin(), a.end()) + 1;
    const int cb = *std::max_element(b.begin(), b.end()) + 1;
    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(ca, cb);
    for (std::size_t i = 0; i < a.size(); ++i) joint(a[i], b[i]) += 1.0 / n;
    const Eigen::VectorXd pa = joint.rowwise().sum();
    const Eigen::VectorXd pb = joint.colwise().sum();
    double vi = 0.0;
    for (int i = 0; i < ca; ++i) {
        for (int j = 0; j < cb; ++j) {
            const double p = joint(i, j);
            if (p > 0) vi -= p * (std::log(p / pa(i)) + std::log(p / pb(j)));
        }
    }
    return vi;
}

}  // namespace testsupport
