#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mscluster/diffusion.hpp"
#include "mscluster/louvain.hpp"
#include "mscluster/partition.hpp"

namespace mscluster {

std::vector<double> log_time_grid(double t_min, double t_max, std::size_t points);
std::vector<double> linear_time_grid(double t_min, double t_max, double step);

struct ScanOptions {
    std::vector<double> times;  // ascending
    std::size_t runs = 500;
    std::size_t top_m = 50;
    std::uint64_t seed = 0;
    // Explicit per-run seeds (size == runs); default is seed + run index.
    std::vector<std::uint64_t> seeds;
    unsigned threads = 0;
    LouvainOptions louvain;
    // Called after each time point of the sweep, before cross-time
    // re-selection; lets callers persist partial results.
    std::function<void(std::size_t index, const Partition& optimum, double vi_ensemble)> on_time_done;
};

struct TimePoint {
    double t = 0.0;
    Partition optimum;      // carries t and stability metadata
    double stability = 0.0;
    double vi_ensemble = 0.0;  // mean pairwise VI over the top_m ensemble
    // Set when the optimum was replaced by a partition found at another time.
    bool reselected = false;
    std::size_t found_at = 0;  // index of the time at which the optimum was found
};

struct ScanResult {
    std::vector<TimePoint> points;
    Eigen::MatrixXd vi_matrix;  // VI(t, t') between stored optima
    std::size_t runs = 0;
    std::size_t top_m = 0;
    std::uint64_t seed = 0;

    std::size_t size() const { return points.size(); }
    std::size_t num_nodes() const { return points.empty() ? 0 : points.front().optimum.size(); }
    std::vector<double> times() const;
};

// Ensemble Louvain at every Markov time, cross-time re-selection (one pass)
// and the VI(t, t') matrix.
ScanResult scan(const DiffusionOperator& op, const ScanOptions& opts);

// Re-evaluates each distinct optimum at every time and keeps the best.
// Never lowers the stored stability. Returns the number of replacements.
std::size_t reselect_across_times(const DiffusionOperator& op, ScanResult& result);

Eigen::MatrixXd vi_matrix(const std::vector<TimePoint>& points);

struct SelectOptions {
    double min_plateau_decades = 0.5;
    double vi_dip_quantile = 0.5;
    // VI(t, t') threshold defining a plateau; defaults to 0.05 log N.
    std::optional<double> plateau_eps;
};

struct RobustLevel {
    std::size_t index = 0;  // into ScanResult::points
    double t = 0.0;
    int num_clusters = 0;
    double stability = 0.0;
    double vi_ensemble = 0.0;
    std::size_t plateau_begin = 0;  // inclusive indices
    std::size_t plateau_end = 0;
    double plateau_decades = 0.0;
};

// Times where VI(t) has a local minimum at or below the given quantile of the
// VI(t) trace and VI(t, t') stays below eps over a contiguous region spanning
// at least min_plateau_decades of log10 time. Plateau edges are placed halfway
// (in log time) between the last grid point inside and the first outside.
// One level per plateau; the all-in-one and all-singleton partitions are never
// reported as levels.
std::vector<RobustLevel> select_robust(const ScanResult& sr, const SelectOptions& opts = {});

// Directory layout: scan.json, partitions/t_<index>.csv, vi_matrix.bin
// (row-major float64, little-endian) with vi_matrix.json sidecar.
void save_scan(const ScanResult& sr, const std::filesystem::path& dir, const std::vector<std::string>& node_ids = {});
ScanResult load_scan(const std::filesystem::path& dir);

void save_partition_csv(const Partition& p, const std::filesystem::path& path,
                        const std::vector<std::string>& node_ids = {});
Partition load_partition_csv(const std::filesystem::path& path);

}  // namespace mscluster
