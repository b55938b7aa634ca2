#include "mscluster/scan.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "mscluster/error.hpp"
#include "mscluster/util.hpp"

namespace mscluster {

std::vector<double> log_time_grid(double t_min, double t_max, std::size_t points) {
    if (!(t_min > 0.0) || !(t_max >= t_min) || points == 0) {
        throw ValidationError("log grid needs 0 < t_min <= t_max and at least one point");
    }
    std::vector<double> grid(points);
    if (points == 1) {
        grid[0] = t_min;
        return grid;
    }
    const double a = std::log10(t_min);
    const double b = std::log10(t_max);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    grid.front() = t_min;
    grid.back() = t_max;
    return grid;
}

std::vector<double> linear_time_grid(double t_min, double t_max, double step) {
    if (!(t_min >= 0.0) || !(t_max >= t_min) || !(step > 0.0)) {
        throw ValidationError("linear grid needs 0 <= t_min <= t_max and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((t_max - t_min) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) grid[i] = t_min + step * static_cast<double>(i);
    return grid;
}

std::vector<double> ScanResult::times() const {
    std::vector<double> t;
    t.reserve(points.size());
    for (const auto& p : points) t.push_back(p.t);
    return t;
}

namespace {

void validate(const DiffusionOperator& op, const ScanOptions& opts) {
    if (opts.times.empty()) throw ValidationError("empty Markov time grid");
    for (std::size_t i = 0; i < opts.times.size(); ++i) {
        if (!(opts.times[i] >= 0.0) || !std::isfinite(opts.times[i])) {
            throw ValidationError("Markov times must be finite and >= 0");
        }
        if (i > 0 && !(opts.times[i] > opts.times[i - 1])) throw ValidationError("Markov time grid must be ascending");
    }
    if (opts.top_m < 2 || opts.runs < opts.top_m) throw ValidationError("need runs >= top_m >= 2");
    if (!opts.seeds.empty() && opts.seeds.size() != opts.runs) {
        throw ValidationError("explicit seeds must have one entry per run");
    }
    (void)op;
}

struct Distinct {
    std::vector<std::size_t> of_point;  // point index -> distinct index
    std::vector<const Partition*> parts;
};

Distinct distinct_optima(const std::vector<TimePoint>& points) {
    Distinct d;
    d.of_point.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t k = 0;
        while (k < d.parts.size() && !(*d.parts[k] == points[i].optimum)) ++k;
        if (k == d.parts.size()) d.parts.push_back(&points[i].optimum);
        d.of_point[i] = k;
    }
    return d;
}

}  // namespace

ScanResult scan(const DiffusionOperator& op, const ScanOptions& opts) {
    validate(op, opts);
    ScanResult result;
    result.runs = opts.runs;
    result.top_m = opts.top_m;
    result.seed = opts.seed;
    result.points.reserve(opts.times.size());

    std::vector<Partition> ensemble(opts.runs);
    for (std::size_t ti = 0; ti < opts.times.size(); ++ti) {
        const double t = opts.times[ti];
        const Eigen::MatrixXd quality = op.quality_matrix(t);
        parallel_for(
            opts.runs,
            [&](std::size_t r) {
                const std::uint64_t seed = opts.seeds.empty() ? opts.seed + r : opts.seeds[r];
                Partition p = louvain(quality, seed, opts.louvain);
                p.stability = op.stability(p, t);
                if (!(p.stability > 0.0) && p.num_clusters() > 1) {
                    p = Partition::all_in_one(op.size());
                    p.stability = 0.0;
                }
                p.markov_time = t;
                ensemble[r] = std::move(p);
            },
            opts.threads);

        std::vector<std::size_t> order(opts.runs);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return ensemble[a].stability > ensemble[b].stability;
        });
        order.resize(opts.top_m);

        double vi_sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < order.size(); ++a) {
            for (std::size_t b = a + 1; b < order.size(); ++b) {
                vi_sum += variation_of_information(ensemble[order[a]], ensemble[order[b]]).vi;
                ++pairs;
            }
        }

        TimePoint point;
        point.t = t;
        point.optimum = ensemble[order.front()];
        point.stability = point.optimum.stability;
        point.vi_ensemble = vi_sum / static_cast<double>(pairs);
        point.found_at = ti;
        result.points.push_back(std::move(point));
        if (opts.on_time_done) opts.on_time_done(ti, result.points.back().optimum, result.points.back().vi_ensemble);
    }

    reselect_across_times(op, result);
    result.vi_matrix = vi_matrix(result.points);
    return result;
}

std::size_t reselect_across_times(const DiffusionOperator& op, ScanResult& result) {
    // Candidates are the optima as they stood before this pass.
    std::vector<TimePoint> candidates;
    {
        const Distinct d = distinct_optima(result.points);
        for (std::size_t k = 0; k < d.parts.size(); ++k) {
            const auto it = std::find(d.of_point.begin(), d.of_point.end(), k);
            candidates.push_back(result.points[static_cast<std::size_t>(it - d.of_point.begin())]);
        }
    }
    std::vector<StabilityCurve> curves;
    curves.reserve(candidates.size());
    for (const auto& c : candidates) curves.push_back(op.stability_curve(c.optimum));

    std::size_t replaced = 0;
    for (auto& point : result.points) {
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (candidates[k].optimum == point.optimum) continue;
            const double r = curves[k](point.t);
            if (r > point.stability) {
                point.optimum = candidates[k].optimum;
                point.optimum.markov_time = point.t;
                point.optimum.stability = r;
                point.stability = r;
                point.found_at = candidates[k].found_at;
                if (!point.reselected) ++replaced;
                point.reselected = true;
            }
        }
    }
    return replaced;
}

Eigen::MatrixXd vi_matrix(const std::vector<TimePoint>& points) {
    const Distinct d = distinct_optima(points);
    const auto k = static_cast<Eigen::Index>(d.parts.size());
    Eigen::MatrixXd between = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = a + 1; b < k; ++b) {
            between(a, b) = between(b, a) = variation_of_information(*d.parts[static_cast<std::size_t>(a)],
                                                                     *d.parts[static_cast<std::size_t>(b)])
                                                .vi;
        }
    }
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            m(i, j) = between(static_cast<Eigen::Index>(d.of_point[static_cast<std::size_t>(i)]),
                              static_cast<Eigen::Index>(d.of_point[static_cast<std::size_t>(j)]));
        }
    }
    return m;
}

namespace {

// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::vector<RobustLevel> select_robust(const ScanResult& sr, const SelectOptions& opts) {
    const std::size_t n = sr.points.size();
    if (n == 0) return {};
    if (static_cast<std::size_t>(sr.vi_matrix.rows()) != n || static_cast<std::size_t>(sr.vi_matrix.cols()) != n) {
        throw DimensionError("VI(t, t') matrix does not match the number of time points");
    }
    const double eps = opts.plateau_eps.value_or(0.05 * std::log(static_cast<double>(std::max<std::size_t>(sr.num_nodes(), 2))));

    std::vector<double> vis(n);
    for (std::size_t i = 0; i < n; ++i) vis[i] = sr.points[i].vi_ensemble;
    const double threshold = quantile(vis, opts.vi_dip_quantile);

    // Smallest positive time, used in place of t = 0 when measuring log spans.
    double t_floor = 0.0;
    for (const auto& p : sr.points) {
        if (p.t > 0.0) {
            t_floor = p.t;
            break;
        }
    }

    auto log_t = [&](std::size_t i) { return std::log10(std::max(sr.points[i].t, t_floor)); };
    // A plateau edge lies halfway in log time to the first grid point outside
    // it; at the ends of the grid it is the grid end.
    auto lower_edge = [&](std::size_t b) {
        if (!(t_floor > 0.0)) return 0.0;
        return b == 0 ? log_t(0) : 0.5 * (log_t(b - 1) + log_t(b));
    };
    auto upper_edge = [&](std::size_t e) {
        if (!(t_floor > 0.0)) return 0.0;
        return e + 1 == n ? log_t(n - 1) : 0.5 * (log_t(e) + log_t(e + 1));
    };

    std::vector<RobustLevel> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = sr.points[i];
        // all-in-one and singletons are the trivial ends of the scale
        if (p.optimum.num_clusters() <= 1 || p.optimum.num_clusters() == static_cast<int>(p.optimum.size())) continue;
        const bool local_min = (i == 0 || vis[i] <= vis[i - 1]) && (i + 1 == n || vis[i] <= vis[i + 1]);
        if (!local_min || vis[i] > threshold) continue;

        const auto row = static_cast<Eigen::Index>(i);
        std::size_t b = i;
        while (b > 0 && sr.vi_matrix(row, static_cast<Eigen::Index>(b - 1)) < eps) --b;
        std::size_t e = i;
        while (e + 1 < n && sr.vi_matrix(row, static_cast<Eigen::Index>(e + 1)) < eps) ++e;
        const double span = upper_edge(e) - lower_edge(b);
        if (span < opts.min_plateau_decades) continue;

        RobustLevel level;
        level.index = i;
        level.t = p.t;
        level.num_clusters = p.optimum.num_clusters();
        level.stability = p.stability;
        level.vi_ensemble = vis[i];
        level.plateau_begin = b;
        level.plateau_end = e;
        level.plateau_decades = span;
        candidates.push_back(level);
    }

    auto centre_offset = [&](const RobustLevel& l) {
        if (!(t_floor > 0.0)) return 0.0;
        return std::abs(log_t(l.index) - 0.5 * (lower_edge(l.plateau_begin) + upper_edge(l.plateau_end)));
    };
    std::stable_sort(candidates.begin(), candidates.end(), [&](const RobustLevel& a, const RobustLevel& b) {
        if (a.plateau_decades != b.plateau_decades) return a.plateau_decades > b.plateau_decades;
        if (a.vi_ensemble != b.vi_ensemble) return a.vi_ensemble < b.vi_ensemble;
        return centre_offset(a) < centre_offset(b);
    });

    std::vector<RobustLevel> chosen;
    for (const auto& c : candidates) {
        const bool clash = std::any_of(chosen.begin(), chosen.end(), [&](const RobustLevel& a) {
            const bool inside = c.index >= a.plateau_begin && c.index <= a.plateau_end;
            const double vi = sr.vi_matrix(static_cast<Eigen::Index>(c.index), static_cast<Eigen::Index>(a.index));
            return inside || vi < eps;
        });
        if (!clash) chosen.push_back(c);
    }
    std::sort(chosen.begin(), chosen.end(), [](const RobustLevel& a, const RobustLevel& b) { return a.index < b.index; });
    return chosen;
}

// ---- persistence ------------------------------------------------------------

void save_partition_csv(const Partition& p, const std::filesystem::path& path, const std::vector<std::string>& node_ids) {
    if (!node_ids.empty() && node_ids.size() != p.size()) throw DimensionError("node id list does not match partition");
    std::string out = "node,cluster\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        out += node_ids.empty() ? std::to_string(i) : node_ids[i];
        out += ',';
        out += std::to_string(p[i]);
        out += '\n';
    }
    write_file(path, out);
}

Partition load_partition_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;
        const auto comma = line.rfind(',');
        double v = 0;
        if (comma == std::string::npos || !parse_double(std::string_view(line).substr(comma + 1), v) || v < 0 ||
            v != std::floor(v)) {
            throw ParseError("bad partition row in " + path.string(), line_no);
        }
        labels.push_back(static_cast<int>(v));
    }
    return Partition(labels);
}

namespace {

std::string partition_file(std::size_t index) {
    std::ostringstream name;
    name << "t_" << std::setw(4) << std::setfill('0') << index << ".csv";
    return name.str();
}

}  // namespace

void save_scan(const ScanResult& sr, const std::filesystem::path& dir, const std::vector<std::string>& node_ids) {
    std::filesystem::create_directories(dir / "partitions");
    nlohmann::json j;
    j["format"] = "mscluster-scan";
    j["version"] = 1;
    j["num_nodes"] = sr.num_nodes();
    j["runs"] = sr.runs;
    j["top_m"] = sr.top_m;
    j["seed"] = sr.seed;
    auto& pts = j["points"] = nlohmann::json::array();
    for (std::size_t i = 0; i < sr.points.size(); ++i) {
        const auto& p = sr.points[i];
        pts.push_back({{"index", i},
                       {"t", p.t},
                       {"num_clusters", p.optimum.num_clusters()},
                       {"stability", p.stability},
                       {"vi_ensemble", p.vi_ensemble},
                       {"reselected", p.reselected},
                       {"found_at", p.found_at},
                       {"partition", "partitions/" + partition_file(i)}});
        save_partition_csv(p.optimum, dir / "partitions" / partition_file(i), node_ids);
    }
    write_file(dir / "scan.json", j.dump(2) + "\n");

    const auto n = static_cast<std::size_t>(sr.vi_matrix.rows());
    std::string bytes(n * n * sizeof(double), '\0');
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            auto bits = std::bit_cast<std::uint64_t>(sr.vi_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
            if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
            std::memcpy(bytes.data() + (r * n + c) * sizeof(double), &bits, sizeof bits);
        }
    }
    write_file(dir / "vi_matrix.bin", bytes);
    nlohmann::json side{{"rows", n}, {"cols", n}, {"dtype", "float64"}, {"order", "row-major"}, {"endianness", "little"}};
    write_file(dir / "vi_matrix.json", side.dump(2) + "\n");
}

ScanResult load_scan(const std::filesystem::path& dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(dir / "scan.json"));
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid scan.json in " + dir.string() + ": " + e.what());
    }
    ScanResult sr;
    try {
        sr.runs = j.at("runs").get<std::size_t>();
        sr.top_m = j.at("top_m").get<std::size_t>();
        sr.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& p : j.at("points")) {
            TimePoint tp;
            tp.t = p.at("t").get<double>();
            tp.stability = p.at("stability").get<double>();
            tp.vi_ensemble = p.at("vi_ensemble").get<double>();
            tp.reselected = p.at("reselected").get<bool>();
            tp.found_at = p.at("found_at").get<std::size_t>();
            tp.optimum = load_partition_csv(dir / p.at("partition").get<std::string>());
            tp.optimum.markov_time = tp.t;
            tp.optimum.stability = tp.stability;
            sr.points.push_back(std::move(tp));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error("invalid scan.json in " + dir.string() + ": " + e.what());
    }

    const auto side = nlohmann::json::parse(read_file(dir / "vi_matrix.json"));
    const auto rows = side.at("rows").get<std::size_t>();
    const auto cols = side.at("cols").get<std::size_t>();
    const std::string bytes = read_file(dir / "vi_matrix.bin");
    if (rows != sr.points.size() || cols != rows || bytes.size() != rows * cols * sizeof(double)) {
        throw DimensionError("vi_matrix.bin does not match scan.json");
    }
    sr.vi_matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, bytes.data() + (r * cols + c) * sizeof(double), sizeof bits);
            if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
            sr.vi_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::bit_cast<double>(bits);
        }
    }
    return sr;
}

}  // namespace mscluster
